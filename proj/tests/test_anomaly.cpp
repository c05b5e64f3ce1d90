#include <cmath>
#include <random>
#include <vector>

#include "anomaly.hpp"
#include "doctest.h"
#include "error.hpp"

using namespace cnsm;
using namespace cnsm::anomaly;

namespace {

Window window_with_rmse(double rmse, std::int64_t start = 0) {
    Window w;
    w.start_tick = start;
    w.end_tick = start + 10;
    w.summary = {8.0, 8.0, rmse, 5.0, 0.0, 1e6};
    return w;
}

std::vector<Window> flat_history(std::size_t n, double rmse) {
    std::vector<Window> h;
    for (std::size_t i = 0; i < n; ++i) h.push_back(window_with_rmse(rmse, 10 * i));
    return h;
}

ingest::MonitoringRecord rec(std::int64_t ts, const std::string& ue, const std::string& gnb,
                             double cqi, double demand = 0.0) {
    ingest::MonitoringRecord r;
    r.timestamp_ms = ts;
    r.ue_id = ue;
    r.gnb_id = gnb;
    r.metrics["wb_cqi"] = cqi;
    if (demand > 0.0) r.metrics["demand_bps"] = demand;
    return r;
}

}  // namespace

TEST_CASE("window summary aggregates means, residual rmse and handovers") {
    std::vector<ingest::MonitoringRecord> records = {
        rec(0, "a", "g1", 10.0, 2e6), rec(0, "b", "g1", 12.0, 4e6),
        rec(10, "a", "g2", 8.0, 2e6), rec(10, "b", "g1", 12.0, 4e6)};
    std::vector<double> preds = {10.0, 11.0, 10.0, 12.0};
    Window w = summarize_window(records, preds, 0, 2);
    REQUIRE(w.summary.size() == kSummaryDim);
    CHECK(w.summary[0] == doctest::Approx(10.5));  // mean observed
    CHECK(w.summary[1] == doctest::Approx(10.75)); // mean predicted
    // residuals 0, 1, -2, 0
    CHECK(w.summary[kResidualRmseIndex] == doctest::Approx(std::sqrt(5.0 / 4.0)));
    CHECK(w.summary[3] == 2.0);  // distinct ues
    CHECK(w.summary[4] == 1.0);  // ue a moved g1 -> g2
    CHECK(w.summary[5] == doctest::Approx(3e6));

    CHECK_THROWS_AS(summarize_window({}, {}, 0, 1), PreconditionError);
    CHECK_THROWS_AS(summarize_window(records, preds, 2, 2), PreconditionError);
    CHECK_THROWS_AS(summarize_window(records, {1.0}, 0, 2), PreconditionError);
}

TEST_CASE("score is not ready before min_history windows") {
    ScoreConfig cfg;
    for (std::size_t n = 0; n < cfg.min_history; ++n)
        CHECK_FALSE(score_window(flat_history(n, 1.0), window_with_rmse(5.0), cfg).has_value());
    CHECK(score_window(flat_history(cfg.min_history, 1.0), window_with_rmse(5.0), cfg)
              .has_value());
}

TEST_CASE("hand-computed z-score") {
    // history residual rmse: ten values, eight 1.0 and two 2.0
    std::vector<Window> h = flat_history(8, 1.0);
    h.push_back(window_with_rmse(2.0));
    h.push_back(window_with_rmse(2.0));
    // mean 1.2, population var = (8*0.04 + 2*0.64)/10 = 0.16, sd 0.4
    auto s = score_window(h, window_with_rmse(2.0));
    REQUIRE(s.has_value());
    CHECK(s->value == doctest::Approx((2.0 - 1.2) / 0.4));

    auto at_mean = score_window(h, window_with_rmse(1.2));
    CHECK(at_mean->value == doctest::Approx(0.0));
}

TEST_CASE("score saturates at max_score on a degenerate history") {
    auto s = score_window(flat_history(10, 1.0), window_with_rmse(2.0));
    REQUIRE(s.has_value());
    CHECK(s->value == 1e6);  // sd floored at epsilon, clamped at the cap

    auto below = score_window(flat_history(10, 1.0), window_with_rmse(0.0));
    CHECK(below->value == -1e6);
}

TEST_CASE("score is invariant under a common shift of history and current") {
    std::vector<Window> h;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    std::vector<double> vals;
    for (int i = 0; i < 12; ++i) vals.push_back(u(rng));
    for (double v : vals) h.push_back(window_with_rmse(v));
    double cur = 3.3;
    double base = score_window(h, window_with_rmse(cur))->value;
    std::vector<Window> shifted;
    for (double v : vals) shifted.push_back(window_with_rmse(v + 10.0));
    double moved = score_window(shifted, window_with_rmse(cur + 10.0))->value;
    CHECK(base == doctest::Approx(moved).epsilon(1e-9));
}

TEST_CASE("detection threshold is inclusive and monotone") {
    AnomalyScore s;
    s.threshold = 3.0;
    s.value = 2.999;
    CHECK_FALSE(detect(s));
    s.value = 3.0;
    CHECK(detect(s));
    s.value = 8.5;
    CHECK(detect(s));
}

TEST_CASE("kmeans degenerate cases") {
    std::vector<std::vector<double>> pts = {{0, 0}, {1, 0}, {0, 1}, {4, 4}};
    ClusterModel one = kmeans_fit(pts, 1, 3);
    REQUIRE(one.centroids.size() == 1);
    CHECK(one.centroids[0][0] == doctest::Approx(1.25));
    CHECK(one.centroids[0][1] == doctest::Approx(1.25));

    ClusterModel full = kmeans_fit(pts, 4, 3);
    CHECK(full.inertia == doctest::Approx(0.0).scale(1).epsilon(1e-12));

    CHECK_THROWS_AS(kmeans_fit(pts, 5, 3), PreconditionError);
    CHECK_THROWS_AS(kmeans_fit(pts, 0, 3), PreconditionError);
    std::vector<std::vector<double>> dup = {{1, 1}, {1, 1}, {1, 1}};
    CHECK_THROWS_AS(kmeans_fit(dup, 2, 3), PreconditionError);
}

TEST_CASE("kmeans separates two far blobs and is deterministic") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g(0.0, 0.3);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({g(rng), g(rng)});
    for (int i = 0; i < 40; ++i) pts.push_back({20.0 + g(rng), 20.0 + g(rng)});
    ClusterModel cm = kmeans_fit(pts, 2, 9);
    REQUIRE(cm.centroids.size() == 2);
    double lo = std::min(cm.centroids[0][0], cm.centroids[1][0]);
    double hi = std::max(cm.centroids[0][0], cm.centroids[1][0]);
    CHECK(lo == doctest::Approx(0.0).scale(1).epsilon(0.2));
    CHECK(hi == doctest::Approx(20.0).epsilon(0.02));
    CHECK(cm.outlier_distance > 0.0);

    ClusterModel again = kmeans_fit(pts, 2, 9);
    CHECK(cm.centroids == again.centroids);
    CHECK(cm.inertia == again.inertia);
}

TEST_CASE("categorize picks the labeled nearest centroid, flags outliers") {
    std::vector<std::vector<double>> pts;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 0.2);
    for (int i = 0; i < 30; ++i)
        pts.push_back({8 + g(rng), 8 + g(rng), 1 + g(rng), 5 + g(rng), 0, 1e6});
    for (int i = 0; i < 30; ++i)
        pts.push_back({4 + g(rng), 8 + g(rng), 6 + g(rng), 25 + g(rng), 0, 1e6});
    ClusterModel cm = kmeans_fit(pts, 2, 1);

    // centroid with the larger ue-count coordinate is the surge cluster
    int surge = cm.centroids[0][3] > cm.centroids[1][3] ? 0 : 1;
    cm.labels[surge] = AnomalyClass::mie_surge;
    cm.labels[1 - surge] = AnomalyClass::route_shift;
    cm.recommended_models[surge] = "model-surge";

    Window w;
    w.start_tick = 0;
    w.end_tick = 10;
    w.summary = {4, 8, 6, 25, 0, 1e6};
    Categorization c = categorize(cm, w);
    CHECK(c.cls == AnomalyClass::mie_surge);
    CHECK(c.recommended_model_id == "model-surge");
    CHECK(c.centroid == surge);

    Window far;
    far.start_tick = 0;
    far.end_tick = 10;
    far.summary = {500, 500, 500, 500, 500, 500};
    Categorization out = categorize(cm, far);
    CHECK(out.cls == AnomalyClass::unknown);
    CHECK(out.recommended_model_id.empty());

    ClusterModel unlabeled = kmeans_fit(pts, 2, 1);
    CHECK_THROWS_AS(categorize(unlabeled, w), PreconditionError);

    Window bad;
    bad.start_tick = 0;
    bad.end_tick = 1;
    bad.summary = {1, 2};
    CHECK_THROWS_AS(categorize(cm, bad), PreconditionError);
}

TEST_CASE("cluster model json round trip") {
    std::vector<std::vector<double>> pts = {{0, 0}, {1, 1}, {9, 9}, {10, 10}};
    ClusterModel cm = kmeans_fit(pts, 2, 4);
    cm.labels[0] = AnomalyClass::demand_drop;
    cm.labels[1] = AnomalyClass::mie_surge;
    cm.recommended_models[1] = "m-42";
    ClusterModel back = cluster_model_from_json(cluster_model_to_json(cm));
    CHECK(back.centroids == cm.centroids);
    CHECK(back.k == cm.k);
    CHECK(back.inertia == cm.inertia);
    CHECK(back.outlier_distance == cm.outlier_distance);
    CHECK(back.labels == cm.labels);
    CHECK(back.recommended_models == cm.recommended_models);
}

TEST_CASE("anomaly class names round trip") {
    for (AnomalyClass c : {AnomalyClass::mie_surge, AnomalyClass::route_shift,
                           AnomalyClass::demand_drop, AnomalyClass::unknown})
        CHECK(anomaly_class_from_name(anomaly_class_name(c)) == c);
    CHECK_THROWS_AS(anomaly_class_from_name("meteor"), ParseError);
}
