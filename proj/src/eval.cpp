#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "error.hpp"
#include "json.hpp"

namespace cnsm::eval {

using nlohmann::json;

std::pair<DataTable, DataTable> scenario_split(const DataTable& table, const SplitSpec& spec) {
    if (spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0)
        throw PreconditionError("train_fraction must be in (0, 1)");

    // Scenario labels come from the scenario column when present, else
    // each UE stream is its own scenario.
    const std::vector<std::string>* labels = nullptr;
    if (table.has("scenario") && table.col("scenario").text)
        labels = &table.col("scenario").str;
    else if (table.has("ue_id") && table.col("ue_id").text)
        labels = &table.col("ue_id").str;
    else
        throw PreconditionError("no scenario or ue_id column to split on");

    std::size_t n = table.row_count();
    for (const std::string& h : spec.holdout_scenarios) {
        if (std::find(labels->begin(), labels->end(), h) == labels->end())
            throw PreconditionError("unknown holdout scenario: " + h);
    }

    std::vector<char> to_val(n, 0);
    if (spec.mode == SplitMode::k_fold) {
        if (spec.k < 2) throw PreconditionError("k_fold needs k >= 2");
        for (std::size_t i = 0; i < n; ++i)
            to_val[i] = (static_cast<int>(i % static_cast<std::size_t>(spec.k)) == spec.fold);
    } else {
        // Contiguous per-scenario segments in row order.
        std::size_t start = 0;
        for (std::size_t i = 1; i <= n; ++i) {
            if (i == n || (*labels)[i] != (*labels)[start]) {
                const std::string& name = (*labels)[start];
                bool whole = std::find(spec.holdout_scenarios.begin(),
                                       spec.holdout_scenarios.end(),
                                       name) != spec.holdout_scenarios.end();
                std::size_t len = i - start;
                std::size_t val_len =
                    whole ? len
                          : static_cast<std::size_t>(
                                std::lround(len * (1.0 - spec.train_fraction)));
                for (std::size_t r = i - val_len; r < i; ++r) to_val[r] = 1;
                start = i;
            }
        }
    }

    DataTable train, val;
    for (const Column& c : table.columns()) {
        if (c.text) {
            std::vector<std::string> a, b;
            for (std::size_t i = 0; i < n; ++i) (to_val[i] ? b : a).push_back(c.str[i]);
            train.add_text(c.name, std::move(a));
            val.add_text(c.name, std::move(b));
        } else {
            std::vector<double> a, b;
            for (std::size_t i = 0; i < n; ++i) (to_val[i] ? b : a).push_back(c.num[i]);
            train.add_numeric(c.name, std::move(a));
            val.add_numeric(c.name, std::move(b));
        }
    }
    return {std::move(train), std::move(val)};
}

double rmse(const std::vector<double>& y, const std::vector<double>& yhat) {
    if (y.empty() || y.size() != yhat.size()) throw PreconditionError("rmse: bad input lengths");
    double sse = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double e = y[i] - yhat[i];
        sse += e * e;
    }
    return std::sqrt(sse / static_cast<double>(y.size()));
}

double mape(const std::vector<double>& y, const std::vector<double>& yhat) {
    if (y.empty() || y.size() != yhat.size()) throw PreconditionError("mape: bad input lengths");
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 0.0) throw DomainError("mape: zero target at row " + std::to_string(i));
        sum += std::abs(y[i] - yhat[i]) / std::abs(y[i]);
    }
    return 100.0 * sum / static_cast<double>(y.size());
}

double accuracy(const std::vector<double>& y, const std::vector<double>& yhat) {
    if (y.empty() || y.size() != yhat.size())
        throw PreconditionError("accuracy: bad input lengths");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double rounded = std::round(std::clamp(yhat[i], 1.0, 15.0));
        if (rounded == y[i]) ++hits;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(y.size());
}

MetricsReport metrics(const std::vector<double>& y, const std::vector<double>& yhat) {
    MetricsReport m;
    m.rmse_raw = rmse(y, yhat);
    m.rmse_normalized = m.rmse_raw / 15.0;
    m.mape_percent = mape(y, yhat);
    m.accuracy_percent = accuracy(y, yhat);
    m.n = y.size();
    return m;
}

std::vector<ErrorRow> top_errors(const std::vector<double>& y, const std::vector<double>& yhat,
                                 std::size_t n) {
    if (y.size() != yhat.size()) throw PreconditionError("top_errors: length mismatch");
    std::vector<std::size_t> idx(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(y[a] - yhat[a]) > std::abs(y[b] - yhat[b]);
    });
    std::vector<ErrorRow> out;
    for (std::size_t i = 0; i < idx.size() && i < n; ++i) {
        std::size_t r = idx[i];
        out.push_back({y[r], yhat[r], std::abs(y[r] - yhat[r])});
    }
    return out;
}

const char* gate_verdict_name(GateVerdict v) {
    switch (v) {
        case GateVerdict::accept: return "accept";
        case GateVerdict::fallback_phase2: return "fallback_phase2";
        case GateVerdict::fallback_phase1: return "fallback_phase1";
    }
    return "accept";
}

ComparisonReport compare_models(
    const std::vector<std::pair<std::string, std::shared_ptr<models::Model>>>& candidates,
    const features::FeatureMatrix& validation, const features::FeatureSet& fs,
    const std::vector<std::string>* deployment_profile) {
    if (candidates.empty()) throw PreconditionError("compare_models: no models");
    ComparisonReport report;

    for (const auto& [name, model] : candidates) {
        ModelEvaluation ev;
        ev.name = name;
        std::vector<double> preds = model->predict(validation.x);
        ev.report = metrics(validation.y, preds);
        ev.worst = top_errors(validation.y, preds, 10);
        report.models.push_back(std::move(ev));
    }

    // Phase-1 gate first: an unusable feature set at runtime invalidates
    // the problem framing regardless of offline scores.
    if (deployment_profile != nullptr) {
        report.violations = features::feature_availability_check(fs, *deployment_profile);
        if (!report.violations.empty()) {
            report.verdict = GateVerdict::fallback_phase1;
            report.detail = std::to_string(report.violations.size()) +
                            " selected feature column(s) unavailable at runtime";
            return report;
        }
    }

    for (const ModelEvaluation& ev : report.models) {
        std::map<double, std::size_t> counts;
        for (const ErrorRow& row : ev.worst) ++counts[row.actual];
        for (const auto& [actual, cnt] : counts) {
            if (2 * cnt >= ev.worst.size() && ev.worst.size() >= 2) {
                report.verdict = GateVerdict::fallback_phase2;
                std::ostringstream os;
                os << ev.name << ": " << cnt << " of top-" << ev.worst.size()
                   << " errors share actual value " << actual;
                report.detail = os.str();
                return report;
            }
        }
    }
    report.verdict = GateVerdict::accept;
    return report;
}

std::string metrics_to_json(const MetricsReport& m) {
    json j;
    j["rmse_raw"] = m.rmse_raw;
    j["rmse_normalized"] = m.rmse_normalized;
    j["mape_percent"] = m.mape_percent;
    j["accuracy_percent"] = m.accuracy_percent;
    j["n"] = m.n;
    return j.dump();
}

MetricsReport metrics_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    MetricsReport m;
    m.rmse_raw = j.at("rmse_raw").get<double>();
    m.rmse_normalized = j.at("rmse_normalized").get<double>();
    m.mape_percent = j.at("mape_percent").get<double>();
    m.accuracy_percent = j.at("accuracy_percent").get<double>();
    m.n = j.at("n").get<std::size_t>();
    return m;
}

std::string comparison_to_json(const ComparisonReport& report) {
    json j;
    j["verdict"] = gate_verdict_name(report.verdict);
    j["detail"] = report.detail;
    j["violations"] = report.violations;
    j["models"] = json::array();
    for (const ModelEvaluation& ev : report.models) {
        json m;
        m["name"] = ev.name;
        m["metrics"] = json::parse(metrics_to_json(ev.report));
        m["top_errors"] = json::array();
        for (const ErrorRow& row : ev.worst)
            m["top_errors"].push_back(
                {{"actual", row.actual}, {"predicted", row.predicted}, {"error", row.abs_error}});
        j["models"].push_back(std::move(m));
    }
    return j.dump(2);
}

std::string comparison_to_text(const ComparisonReport& report) {
    std::ostringstream os;
    char line[128];
    std::snprintf(line, sizeof(line), "%-12s %10s %10s %10s %12s\n", "Model", "RMSE",
                  "RMSE/15", "MAPE (%)", "Accuracy (%)");
    os << line;
    for (const ModelEvaluation& ev : report.models) {
        std::snprintf(line, sizeof(line), "%-12s %10.4f %10.4f %10.2f %12.2f\n", ev.name.c_str(),
                      ev.report.rmse_raw, ev.report.rmse_normalized, ev.report.mape_percent,
                      ev.report.accuracy_percent);
        os << line;
    }
    os << "verdict: " << gate_verdict_name(report.verdict);
    if (!report.detail.empty()) os << " (" << report.detail << ")";
    os << '\n';
    return os.str();
}

}  // namespace cnsm::eval
