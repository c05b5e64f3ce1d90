#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "doctest.h"
#include "error.hpp"
#include "eval.hpp"
#include "models.hpp"
#include "table.hpp"

using namespace cnsm;
using namespace cnsm::eval;

namespace {

DataTable two_scenarios(std::size_t len_a, std::size_t len_b) {
    DataTable t;
    std::vector<std::string> sc;
    std::vector<double> v;
    for (std::size_t i = 0; i < len_a; ++i) {
        sc.push_back("walk");
        v.push_back(static_cast<double>(i));
    }
    for (std::size_t i = 0; i < len_b; ++i) {
        sc.push_back("drive");
        v.push_back(100.0 + i);
    }
    t.add_text("scenario", sc);
    t.add_numeric("v", v);
    return t;
}

std::shared_ptr<models::LinearModel> constant_model(double value) {
    auto m = std::make_shared<models::LinearModel>();
    m->intercept = value;
    return m;
}

features::FeatureMatrix constant_validation(std::vector<double> y) {
    features::FeatureMatrix v;
    v.x.assign(y.size(), {});
    v.y = std::move(y);
    return v;
}

}  // namespace

TEST_CASE("scenario split holds out a contiguous tail per scenario") {
    DataTable t = two_scenarios(20, 10);
    SplitSpec spec;
    spec.train_fraction = 0.9;
    auto [train, val] = scenario_split(t, spec);
    CHECK(train.row_count() == 27);
    CHECK(val.row_count() == 3);
    // walk rows 18,19 and drive row 9 go to validation
    CHECK(val.num("v") == std::vector<double>{18, 19, 109});
    CHECK(train.num("v")[17] == 17.0);
    CHECK(train.num("v")[26] == 108.0);
}

TEST_CASE("holdout scenarios go entirely to validation") {
    DataTable t = two_scenarios(20, 10);
    SplitSpec spec;
    spec.holdout_scenarios = {"drive"};
    auto [train, val] = scenario_split(t, spec);
    CHECK(val.row_count() == 12);  // all 10 drive rows + 2-row walk tail
    for (std::size_t i = 2; i < 12; ++i) CHECK(val.num("v")[i] >= 100.0);

    spec.holdout_scenarios = {"swim"};
    CHECK_THROWS_AS(scenario_split(t, spec), PreconditionError);
}

TEST_CASE("split falls back to ue_id streams and validates the fraction") {
    DataTable t;
    t.add_text("ue_id", {"a", "a", "a", "a", "b", "b", "b", "b"});
    t.add_numeric("v", {0, 1, 2, 3, 4, 5, 6, 7});
    SplitSpec spec;
    spec.train_fraction = 0.75;
    auto [train, val] = scenario_split(t, spec);
    CHECK(val.num("v") == std::vector<double>{3, 7});

    spec.train_fraction = 1.0;
    CHECK_THROWS_AS(scenario_split(t, spec), PreconditionError);
    spec.train_fraction = 0.0;
    CHECK_THROWS_AS(scenario_split(t, spec), PreconditionError);

    DataTable bare;
    bare.add_numeric("v", {1, 2});
    spec.train_fraction = 0.5;
    CHECK_THROWS_AS(scenario_split(bare, spec), PreconditionError);
}

TEST_CASE("k-fold splits partition the rows") {
    DataTable t;
    t.add_text("ue_id", std::vector<std::string>(10, "u"));
    std::vector<double> v;
    for (int i = 0; i < 10; ++i) v.push_back(i);
    t.add_numeric("v", v);

    SplitSpec spec;
    spec.mode = SplitMode::k_fold;
    spec.k = 5;
    spec.fold = 2;
    auto [train, val] = scenario_split(t, spec);
    CHECK(val.num("v") == std::vector<double>{2, 7});
    CHECK(train.row_count() == 8);

    std::vector<int> seen(10, 0);
    for (int fold = 0; fold < 5; ++fold) {
        spec.fold = fold;
        auto [tr, va] = scenario_split(t, spec);
        for (double x : va.num("v")) ++seen[static_cast<int>(x)];
    }
    for (int c : seen) CHECK(c == 1);

    spec.k = 1;
    CHECK_THROWS_AS(scenario_split(t, spec), PreconditionError);
}

TEST_CASE("metric hand examples") {
    std::vector<double> y = {2, 4, 10};
    std::vector<double> yhat = {3, 4, 10};
    CHECK(rmse(y, yhat) == doctest::Approx(std::sqrt(1.0 / 3.0)));
    CHECK(mape(y, yhat) == doctest::Approx(100.0 * (0.5) / 3.0));
    CHECK(accuracy(y, yhat) == doctest::Approx(100.0 * 2.0 / 3.0));

    MetricsReport m = metrics(y, yhat);
    CHECK(m.rmse_normalized == doctest::Approx(m.rmse_raw / 15.0));
    CHECK(m.n == 3);

    CHECK(rmse(y, y) == 0.0);
    CHECK(mape(y, y) == 0.0);
    CHECK(accuracy(y, y) == 100.0);
}

TEST_CASE("accuracy rounds half away from zero and clamps into 1..15") {
    CHECK(accuracy({8}, {7.49}) == 0.0);
    CHECK(accuracy({8}, {7.49999}) == 0.0);
    CHECK(accuracy({7}, {7.49}) == 100.0);
    CHECK(accuracy({8}, {7.5}) == 100.0);
    CHECK(accuracy({1}, {-3.0}) == 100.0);
    CHECK(accuracy({15}, {42.0}) == 100.0);
}

TEST_CASE("metric input validation") {
    CHECK_THROWS_AS(rmse({}, {}), PreconditionError);
    CHECK_THROWS_AS(rmse({1}, {1, 2}), PreconditionError);
    CHECK_THROWS_AS(mape({0, 1}, {1, 1}), DomainError);
    CHECK_THROWS_AS(accuracy({1}, {}), PreconditionError);
}

TEST_CASE("rmse bounds: between mean and max absolute error") {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(1.0, 15.0);
    for (int t = 0; t < 25; ++t) {
        std::vector<double> y, yhat;
        double max_err = 0.0, mean_err = 0.0;
        for (int i = 0; i < 40; ++i) {
            y.push_back(u(rng));
            yhat.push_back(u(rng));
            double e = std::abs(y.back() - yhat.back());
            max_err = std::max(max_err, e);
            mean_err += e;
        }
        mean_err /= 40.0;
        double r = rmse(y, yhat);
        CHECK(r >= mean_err - 1e-12);
        CHECK(r <= max_err + 1e-12);
    }
}

TEST_CASE("top_errors sorts descending and keeps ties in row order") {
    std::vector<double> y = {5, 5, 5, 5};
    std::vector<double> yhat = {6, 3, 7, 4};  // errors 1, 2, 2, 1
    std::vector<ErrorRow> rows = top_errors(y, yhat, 3);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].predicted == 3.0);
    CHECK(rows[1].predicted == 7.0);
    CHECK(rows[2].predicted == 6.0);

    CHECK(top_errors(y, yhat, 99).size() == 4);
    CHECK_THROWS_AS(top_errors({1}, {1, 2}, 1), PreconditionError);
}

TEST_CASE("the published error-table rows come out of the metric path") {
    // six (actual, predicted) pairs and the absolute errors they produce
    std::vector<double> y = {3, 3, 3, 3, 3, 6, 7, 8};
    std::vector<double> yhat = {14.17, 14.16, 14.19, 12.88, 7.88, 9.82, 7.1, 8.05};
    std::vector<ErrorRow> rows = top_errors(y, yhat, 6);
    REQUIRE(rows.size() == 6);
    auto two_dp = [](double v) { return std::round(v * 100.0) / 100.0; };
    CHECK(two_dp(rows[0].abs_error) == 11.19);
    CHECK(two_dp(rows[1].abs_error) == 11.17);
    CHECK(two_dp(rows[2].abs_error) == 11.16);
    CHECK(two_dp(rows[3].abs_error) == 9.88);
    CHECK(two_dp(rows[4].abs_error) == 4.88);
    CHECK(two_dp(rows[5].abs_error) == 3.82);
    for (int i = 0; i < 5; ++i) CHECK(rows[i].actual == 3.0);
    CHECK(rows[5].actual == 6.0);
}

TEST_CASE("compare_models accepts a sound fit") {
    // constant predictor vs diverse targets: errors spread across actual values
    features::FeatureMatrix val = constant_validation({6, 7, 8, 9, 10, 5, 11, 4, 12, 6.5});
    features::FeatureSet fs;
    ComparisonReport rep =
        compare_models({{"const", constant_model(8.0)}}, val, fs, nullptr);
    CHECK(rep.verdict == GateVerdict::accept);
    REQUIRE(rep.models.size() == 1);
    CHECK(rep.models[0].report.n == 10);
    CHECK(rep.models[0].worst.size() == 10);
}

TEST_CASE("repeated-actual spike pattern trips the phase-2 gate") {
    // five of the ten validation targets sit at 3 under a high predictor
    features::FeatureMatrix val =
        constant_validation({3, 3, 3, 3, 3, 9, 10, 11, 12, 13});
    features::FeatureSet fs;
    ComparisonReport rep =
        compare_models({{"const", constant_model(14.0)}}, val, fs, nullptr);
    CHECK(rep.verdict == GateVerdict::fallback_phase2);
    CHECK(rep.detail.find("actual value 3") != std::string::npos);
}

TEST_CASE("phase-1 availability gate wins over phase-2") {
    features::FeatureMatrix val =
        constant_validation({3, 3, 3, 3, 3, 9, 10, 11, 12, 13});
    features::FeatureSet fs;
    fs.base_features = {"rsrp"};
    std::vector<std::string> sleeping_iot = {"timestamp_ms", "ue_id", "wb_cqi"};
    ComparisonReport rep =
        compare_models({{"const", constant_model(14.0)}}, val, fs, &sleeping_iot);
    CHECK(rep.verdict == GateVerdict::fallback_phase1);
    CHECK(rep.violations.size() == 5);

    // same inputs with a capable profile drop through to phase 2
    std::vector<std::string> rich = {"rsrp"};
    ComparisonReport rep2 =
        compare_models({{"const", constant_model(14.0)}}, val, fs, &rich);
    CHECK(rep2.verdict == GateVerdict::fallback_phase2);

    CHECK_THROWS_AS(compare_models({}, val, fs, nullptr), PreconditionError);
}

TEST_CASE("metrics and comparison serialization") {
    MetricsReport m = metrics({2, 4, 10}, {3, 4, 10});
    MetricsReport back = metrics_from_json(metrics_to_json(m));
    CHECK(back.rmse_raw == m.rmse_raw);
    CHECK(back.mape_percent == m.mape_percent);
    CHECK(back.n == m.n);

    features::FeatureMatrix val = constant_validation({6, 7, 8, 9, 10});
    features::FeatureSet fs;
    ComparisonReport rep = compare_models({{"const", constant_model(8.0)}}, val, fs, nullptr);
    std::string j = comparison_to_json(rep);
    CHECK(j.find("\"verdict\"") != std::string::npos);
    CHECK(j.find("accept") != std::string::npos);
    CHECK(j.find("\"top_errors\"") != std::string::npos);

    std::string text = comparison_to_text(rep);
    CHECK(text.find("Model") != std::string::npos);
    CHECK(text.find("RMSE") != std::string::npos);
    CHECK(text.find("verdict: accept") != std::string::npos);
    CHECK(text.find("const") != std::string::npos);
}
