#ifndef CNSM_ANOMALY_HPP
#define CNSM_ANOMALY_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ingest.hpp"

namespace cnsm::anomaly {

// Non-overlapping aggregation window over the whole monitored area.
struct Window {
    std::int64_t start_tick = 0;
    std::int64_t end_tick = 0;  // exclusive; must exceed start_tick
    // mean observed CQI, mean predicted CQI, residual RMSE, UE count,
    // handover count, mean demand — in that order.
    std::vector<double> summary;
};

constexpr std::size_t kSummaryDim = 6;
constexpr std::size_t kResidualRmseIndex = 2;

struct AnomalyScore {
    double value = 0.0;
    Window window;
    double threshold = 3.0;
};

enum class AnomalyClass { mie_surge, route_shift, demand_drop, unknown };
const char* anomaly_class_name(AnomalyClass c);
AnomalyClass anomaly_class_from_name(const std::string& name);

struct Categorization {
    AnomalyClass cls = AnomalyClass::unknown;
    std::string recommended_model_id;  // empty for unknown
    int centroid = -1;
    double distance = 0.0;
};

struct ClusterModel {
    std::vector<std::vector<double>> centroids;
    int k = 0;
    double inertia = 0.0;
    // Label/model assignment per centroid; empty in pure-clustering mode.
    std::map<int, AnomalyClass> labels;
    std::map<int, std::string> recommended_models;
    double outlier_distance = 0.0;  // q99 of training point-to-centroid distances
};

struct ScoreConfig {
    std::size_t min_history = 10;
    double epsilon = 1e-9;  // std floor
    double max_score = 1e6;
    double threshold = 3.0;
};

// Aggregates one window's records and matching per-record predictions.
// Handover count = number of serving-gNB changes across consecutive
// samples of the same UE.
Window summarize_window(const std::vector<ingest::MonitoringRecord>& records,
                        const std::vector<double>& predictions, std::int64_t start_tick,
                        std::int64_t end_tick);

// z-score of the current residual RMSE against the trailing history.
// Empty optional while history is shorter than min_history.
std::optional<AnomalyScore> score_window(const std::vector<Window>& history,
                                         const Window& current, const ScoreConfig& cfg = {});

inline bool detect(const AnomalyScore& s) { return s.value >= s.threshold; }

// k-means++ seeding then Lloyd iterations to an assignment fixpoint.
ClusterModel kmeans_fit(const std::vector<std::vector<double>>& points, int k,
                        std::uint64_t seed, int max_iter = 100);

// Nearest centroid by Euclidean distance; past the outlier radius the
// window is reported as unknown.
Categorization categorize(const ClusterModel& cm, const Window& window);

std::string cluster_model_to_json(const ClusterModel& cm);
ClusterModel cluster_model_from_json(const std::string& json_text);

}  // namespace cnsm::anomaly

#endif
