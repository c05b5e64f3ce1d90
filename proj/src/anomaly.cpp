#include "anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "error.hpp"
#include "json.hpp"

namespace cnsm::anomaly {

using nlohmann::json;

const char* anomaly_class_name(AnomalyClass c) {
    switch (c) {
        case AnomalyClass::mie_surge: return "mie_surge";
        case AnomalyClass::route_shift: return "route_shift";
        case AnomalyClass::demand_drop: return "demand_drop";
        case AnomalyClass::unknown: return "unknown";
    }
    return "unknown";
}

AnomalyClass anomaly_class_from_name(const std::string& name) {
    if (name == "mie_surge") return AnomalyClass::mie_surge;
    if (name == "route_shift") return AnomalyClass::route_shift;
    if (name == "demand_drop") return AnomalyClass::demand_drop;
    if (name == "unknown") return AnomalyClass::unknown;
    throw ParseError("unknown anomaly class: " + name);
}

Window summarize_window(const std::vector<ingest::MonitoringRecord>& records,
                        const std::vector<double>& predictions, std::int64_t start_tick,
                        std::int64_t end_tick) {
    if (records.empty()) throw PreconditionError("summarize_window: empty window");
    if (end_tick <= start_tick) throw PreconditionError("summarize_window: empty tick range");
    if (records.size() != predictions.size())
        throw PreconditionError("summarize_window: prediction count mismatch");

    double sum_obs = 0.0, sum_pred = 0.0, sse = 0.0, sum_demand = 0.0;
    std::set<std::string> ues;
    std::map<std::string, std::string> last_gnb;
    std::size_t handovers = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const ingest::MonitoringRecord& r = records[i];
        auto it = r.metrics.find("wb_cqi");
        if (it == r.metrics.end()) throw PreconditionError("summarize_window: record lacks wb_cqi");
        sum_obs += it->second;
        sum_pred += predictions[i];
        double e = it->second - predictions[i];
        sse += e * e;
        auto dm = r.metrics.find("demand_bps");
        if (dm != r.metrics.end()) sum_demand += dm->second;
        ues.insert(r.ue_id);
        auto lg = last_gnb.find(r.ue_id);
        if (lg != last_gnb.end() && lg->second != r.gnb_id) ++handovers;
        last_gnb[r.ue_id] = r.gnb_id;
    }
    double n = static_cast<double>(records.size());
    Window w;
    w.start_tick = start_tick;
    w.end_tick = end_tick;
    w.summary = {sum_obs / n,
                 sum_pred / n,
                 std::sqrt(sse / n),
                 static_cast<double>(ues.size()),
                 static_cast<double>(handovers),
                 sum_demand / n};
    return w;
}

std::optional<AnomalyScore> score_window(const std::vector<Window>& history, const Window& current,
                                         const ScoreConfig& cfg) {
    if (history.size() < cfg.min_history) return std::nullopt;
    double mean = 0.0;
    for (const Window& w : history) mean += w.summary.at(kResidualRmseIndex);
    mean /= static_cast<double>(history.size());
    double var = 0.0;
    for (const Window& w : history) {
        double d = w.summary.at(kResidualRmseIndex) - mean;
        var += d * d;
    }
    double sd = std::max(std::sqrt(var / static_cast<double>(history.size())), cfg.epsilon);
    double z = (current.summary.at(kResidualRmseIndex) - mean) / sd;
    AnomalyScore s;
    s.value = std::clamp(z, -cfg.max_score, cfg.max_score);
    s.window = current;
    s.threshold = cfg.threshold;
    return s;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

ClusterModel kmeans_fit(const std::vector<std::vector<double>>& points, int k, std::uint64_t seed,
                        int max_iter) {
    if (k < 1) throw PreconditionError("kmeans_fit: k must be >= 1");
    std::set<std::vector<double>> distinct(points.begin(), points.end());
    if (distinct.size() < static_cast<std::size_t>(k))
        throw PreconditionError("kmeans_fit: fewer distinct points than k");
    const std::size_t n = points.size();

    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> centroids;
    centroids.push_back(points[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
    std::vector<double> d2(n);
    while (centroids.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = sq_dist(points[i], centroids[0]);
            for (std::size_t c = 1; c < centroids.size(); ++c)
                best = std::min(best, sq_dist(points[i], centroids[c]));
            d2[i] = best;
            total += best;
        }
        // D^2 sampling; duplicates of chosen centroids carry zero weight.
        double draw = std::uniform_real_distribution<double>(0.0, total)(rng);
        std::size_t pick = 0;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += d2[i];
            if (acc >= draw && d2[i] > 0.0) {
                pick = i;
                break;
            }
            if (i + 1 == n) pick = i;
        }
        centroids.push_back(points[pick]);
    }

    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double bd = sq_dist(points[i], centroids[0]);
            for (int c = 1; c < k; ++c) {
                double d = sq_dist(points[i], centroids[c]);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed) break;
        std::vector<std::vector<double>> sums(k, std::vector<double>(points[0].size(), 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < points[i].size(); ++d) sums[assign[i]][d] += points[i][d];
            ++counts[assign[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its centroid
            for (double& v : sums[c]) v /= static_cast<double>(counts[c]);
            centroids[c] = sums[c];
        }
    }

    ClusterModel cm;
    cm.centroids = std::move(centroids);
    cm.k = k;
    std::vector<double> dists(n);
    for (std::size_t i = 0; i < n; ++i) {
        dists[i] = std::sqrt(sq_dist(points[i], cm.centroids[assign[i]]));
        cm.inertia += dists[i] * dists[i];
    }
    std::sort(dists.begin(), dists.end());
    std::size_t q = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n)));
    cm.outlier_distance = dists[std::min(q == 0 ? 0 : q - 1, n - 1)];
    return cm;
}

Categorization categorize(const ClusterModel& cm, const Window& window) {
    if (cm.labels.empty())
        throw PreconditionError(
            "cluster model is unlabeled; fit labels from scripted test traffic first");
    if (cm.centroids.empty() || window.summary.size() != cm.centroids[0].size())
        throw PreconditionError("categorize: dimension mismatch");
    int best = 0;
    double bd = sq_dist(window.summary, cm.centroids[0]);
    for (std::size_t c = 1; c < cm.centroids.size(); ++c) {
        double d = sq_dist(window.summary, cm.centroids[c]);
        if (d < bd) {
            bd = d;
            best = static_cast<int>(c);
        }
    }
    Categorization out;
    out.centroid = best;
    out.distance = std::sqrt(bd);
    if (out.distance > cm.outlier_distance) {
        out.cls = AnomalyClass::unknown;
        return out;
    }
    auto it = cm.labels.find(best);
    out.cls = it == cm.labels.end() ? AnomalyClass::unknown : it->second;
    auto rm = cm.recommended_models.find(best);
    if (out.cls != AnomalyClass::unknown && rm != cm.recommended_models.end())
        out.recommended_model_id = rm->second;
    return out;
}

std::string cluster_model_to_json(const ClusterModel& cm) {
    json j;
    j["k"] = cm.k;
    j["centroids"] = cm.centroids;
    j["inertia"] = cm.inertia;
    j["outlier_distance"] = cm.outlier_distance;
    j["labels"] = json::object();
    for (const auto& [c, cls] : cm.labels) j["labels"][std::to_string(c)] = anomaly_class_name(cls);
    j["recommended_models"] = json::object();
    for (const auto& [c, id] : cm.recommended_models)
        j["recommended_models"][std::to_string(c)] = id;
    return j.dump();
}

ClusterModel cluster_model_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    ClusterModel cm;
    cm.k = j.at("k").get<int>();
    cm.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
    cm.inertia = j.at("inertia").get<double>();
    cm.outlier_distance = j.at("outlier_distance").get<double>();
    if (j.contains("labels"))
        for (auto it = j["labels"].begin(); it != j["labels"].end(); ++it)
            cm.labels[std::stoi(it.key())] = anomaly_class_from_name(it.value().get<std::string>());
    if (j.contains("recommended_models"))
        for (auto it = j["recommended_models"].begin(); it != j["recommended_models"].end(); ++it)
            cm.recommended_models[std::stoi(it.key())] = it.value().get<std::string>();
    return cm;
}

}  // namespace cnsm::anomaly
