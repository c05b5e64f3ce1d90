#ifndef CNSM_EVAL_HPP
#define CNSM_EVAL_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "models.hpp"
#include "table.hpp"

namespace cnsm::eval {

enum class SplitMode { scenario_based, k_fold };

struct SplitSpec {
    SplitMode mode = SplitMode::scenario_based;
    double train_fraction = 0.9;
    std::vector<std::string> holdout_scenarios;  // entire scenarios to validation
    int k = 10;                                  // k_fold mode
    int fold = 0;
    std::uint64_t seed = 0;
};

struct MetricsReport {
    double rmse_raw = 0.0;
    double rmse_normalized = 0.0;  // rmse_raw / 15
    double mape_percent = 0.0;
    double accuracy_percent = 0.0;
    std::size_t n = 0;
};

std::string metrics_to_json(const MetricsReport& m);
MetricsReport metrics_from_json(const std::string& json_text);

struct ErrorRow {
    double actual;
    double predicted;
    double abs_error;
};

// (train, validation): for scenario_based, a contiguous tail of each
// scenario's series is held out; scenarios listed in holdout_scenarios go
// entirely to validation.
std::pair<DataTable, DataTable> scenario_split(const DataTable& table, const SplitSpec& spec);

double rmse(const std::vector<double>& y, const std::vector<double>& yhat);
double mape(const std::vector<double>& y, const std::vector<double>& yhat);  // percent
// Rounded-and-clamped exact match, percent. round half away from zero.
double accuracy(const std::vector<double>& y, const std::vector<double>& yhat);

MetricsReport metrics(const std::vector<double>& y, const std::vector<double>& yhat);

std::vector<ErrorRow> top_errors(const std::vector<double>& y, const std::vector<double>& yhat,
                                 std::size_t n);

enum class GateVerdict { accept, fallback_phase2, fallback_phase1 };
const char* gate_verdict_name(GateVerdict v);

struct ModelEvaluation {
    std::string name;
    MetricsReport report;
    std::vector<ErrorRow> worst;  // top 10
};

struct ComparisonReport {
    std::vector<ModelEvaluation> models;
    GateVerdict verdict = GateVerdict::accept;
    std::vector<std::string> violations;  // availability violations, phase-1 path
    std::string detail;
};

// Gates: fallback_phase1 when the deployment profile cannot supply the
// feature set; fallback_phase2 when >= half of any model's top-10 errors
// share one actual value (the repeated-spike pattern).
ComparisonReport compare_models(
    const std::vector<std::pair<std::string, std::shared_ptr<models::Model>>>& candidates,
    const features::FeatureMatrix& validation, const features::FeatureSet& fs,
    const std::vector<std::string>* deployment_profile = nullptr);

std::string comparison_to_json(const ComparisonReport& report);
// Aligned text table with RMSE / MAPE % / Accuracy % columns.
std::string comparison_to_text(const ComparisonReport& report);

}  // namespace cnsm::eval

#endif
