#include <cmath>
#include <memory>
#include <set>
#include <vector>

#include "doctest.h"
#include "error.hpp"
#include "models.hpp"
#include "pcs.hpp"
#include "preprocess.hpp"
#include "table.hpp"

using namespace cnsm;
using namespace cnsm::pcs;

namespace {

std::shared_ptr<models::LinearModel> constant_model(double value) {
    auto m = std::make_shared<models::LinearModel>();
    m->intercept = value;
    return m;
}

std::size_t count_slice(const EnvState& s, const std::string& slice) {
    std::size_t n = 0;
    for (const UeState& ue : s.ues)
        if (ue.slice_id == slice) ++n;
    return n;
}

}  // namespace

TEST_CASE("env_init spawns the configured population deterministically") {
    EnvConfig cfg = default_env_config();
    EnvState s = env_init(cfg, 42);
    CHECK(s.ues.size() == 12);
    CHECK(count_slice(s, "ehealth") == 4);
    CHECK(count_slice(s, "video") == 4);
    CHECK(count_slice(s, "iot") == 4);
    REQUIRE(s.slices.size() == 3);
    for (const SliceState& sl : s.slices) CHECK(sl.allocated_prbs == 40);
    for (const UeState& ue : s.ues) {
        double d = std::hypot(ue.x, ue.y);
        CHECK(d >= 50.0 - 1e-9);
        CHECK(d <= cfg.spawn_radius_m + 1e-9);
        CHECK(ue.true_cqi >= 1);
        CHECK(ue.true_cqi <= 15);
        CHECK(ue.serving_gnb == "gnb0");
        CHECK((ue.hd_capable == (ue.slice_id == "video")));
    }
    EnvState again = env_init(cfg, 42);
    for (std::size_t i = 0; i < s.ues.size(); ++i) {
        CHECK(s.ues[i].x == again.ues[i].x);
        CHECK(s.ues[i].true_cqi == again.ues[i].true_cqi);
    }
    EnvState other = env_init(cfg, 43);
    bool differs = false;
    for (std::size_t i = 0; i < s.ues.size(); ++i)
        if (s.ues[i].x != other.ues[i].x) differs = true;
    CHECK(differs);
}

TEST_CASE("env_init validates its configuration") {
    EnvConfig cfg = default_env_config();
    cfg.gnbs.clear();
    CHECK_THROWS_AS(env_init(cfg, 1), PreconditionError);
    cfg = default_env_config();
    cfg.cqi_efficiency.pop_back();
    CHECK_THROWS_AS(env_init(cfg, 1), PreconditionError);
    cfg = default_env_config();
    cfg.cqi_efficiency[4] = cfg.cqi_efficiency[3];
    CHECK_THROWS_AS(env_init(cfg, 1), PreconditionError);
}

TEST_CASE("a step with no actions or script leaves a static plant unchanged") {
    EnvConfig cfg = default_env_config();
    EnvState s0 = env_init(cfg, 7);
    std::vector<ActionEvent> none;
    EnvState s1 = env_step(cfg, s0, none, 1);
    CHECK(s1.tick == 1);
    REQUIRE(s1.ues.size() == s0.ues.size());
    for (std::size_t i = 0; i < s0.ues.size(); ++i) {
        CHECK(s1.ues[i].x == s0.ues[i].x);
        CHECK(s1.ues[i].true_cqi == s0.ues[i].true_cqi);
        CHECK(s1.ues[i].achieved_throughput_bps ==
              doctest::Approx(s0.ues[i].achieved_throughput_bps));
    }
}

TEST_CASE("per-ue throughput scales linearly with the slice allocation") {
    EnvConfig cfg = default_env_config();
    EnvState s0 = env_init(cfg, 11);
    auto realloc_to = [&](int ehealth_prbs) {
        std::vector<std::pair<std::string, int>> plan = {
            {"ehealth", ehealth_prbs}, {"video", 10}, {"iot", 10}};
        std::vector<ActionEvent> acts;
        for (const auto& [slice, prbs] : plan) {
            ActionEvent a;
            a.kind = ActionKind::reallocate_prbs;
            a.slice_id = slice;
            a.prbs = prbs;
            acts.push_back(a);
        }
        return env_step(cfg, s0, acts, 1);
    };
    EnvState narrow = realloc_to(20);
    EnvState wide = realloc_to(40);
    for (std::size_t i = 0; i < narrow.ues.size(); ++i) {
        if (narrow.ues[i].slice_id != "ehealth") continue;
        CHECK(wide.ues[i].achieved_throughput_bps ==
              doctest::Approx(2.0 * narrow.ues[i].achieved_throughput_bps));
        CHECK(narrow.ues[i].achieved_throughput_bps > 0.0);
    }
}

TEST_CASE("over-budget or negative reallocation sets are rejected wholesale") {
    EnvConfig cfg = default_env_config();  // budget 120
    EnvState s0 = env_init(cfg, 3);
    std::vector<ActionEvent> acts;
    ActionEvent a;
    a.kind = ActionKind::reallocate_prbs;
    a.slice_id = "ehealth";
    a.prbs = 200;
    acts.push_back(a);
    EnvState s1 = env_step(cfg, s0, acts, 1);
    CHECK(acts[0].rejected);
    for (const SliceState& sl : s1.slices) CHECK(sl.allocated_prbs == 40);

    std::vector<ActionEvent> neg;
    a.prbs = -5;
    neg.push_back(a);
    env_step(cfg, s0, neg, 1);
    CHECK(neg[0].rejected);
}

TEST_CASE("degrade and restore flow through demand and capability flags") {
    EnvConfig cfg = default_env_config();
    EnvState s0 = env_init(cfg, 5);
    std::string video_ue, iot_ue;
    for (const UeState& ue : s0.ues) {
        if (ue.slice_id == "video" && video_ue.empty()) video_ue = ue.ue_id;
        if (ue.slice_id == "iot" && iot_ue.empty()) iot_ue = ue.ue_id;
    }
    std::vector<ActionEvent> acts(2);
    acts[0].kind = ActionKind::degrade_to_sd;
    acts[0].ue_id = video_ue;
    acts[1].kind = ActionKind::restore_hd;
    acts[1].ue_id = iot_ue;  // not hd-capable: must be ignored
    EnvState s1 = env_step(cfg, s0, acts, 1);
    for (const UeState& ue : s1.ues) {
        if (ue.ue_id == video_ue) {
            CHECK(ue.tier == QualityTier::sd);
            CHECK(ue.demand_bps == cfg.sd_demand_bps);
        }
        if (ue.ue_id == iot_ue) {
            CHECK(ue.tier == QualityTier::sd);
            CHECK(ue.demand_bps == 5e4);
        }
    }
    std::vector<ActionEvent> back(1);
    back[0].kind = ActionKind::restore_hd;
    back[0].ue_id = video_ue;
    EnvState s2 = env_step(cfg, s1, back, 2);
    for (const UeState& ue : s2.ues)
        if (ue.ue_id == video_ue) {
            CHECK(ue.tier == QualityTier::hd);
            CHECK(ue.demand_bps == cfg.hd_demand_bps);
        }
}

TEST_CASE("scripted surge multiplies the slice population and raises interference") {
    EnvConfig cfg = default_env_config();
    ScriptEvent ev;
    ev.tick = 2;
    ev.kind = "mie_surge";
    ev.slice_id = "video";
    ev.factor = 5.0;
    ev.interference_db = 12.0;
    cfg.script = {ev};
    EnvState s = env_init(cfg, 9);
    std::map<std::string, int> cqi_before;  // per ue, surviving ids only
    for (const UeState& ue : s.ues) cqi_before[ue.ue_id] = ue.true_cqi;
    std::vector<ActionEvent> none;
    s = env_step(cfg, s, none, 1);
    CHECK(count_slice(s, "video") == 4);
    s = env_step(cfg, s, none, 2);
    CHECK(count_slice(s, "video") == 20);
    CHECK(count_slice(s, "ehealth") == 4);
    CHECK(s.slice_interference_db.at("video") == 12.0);
    // interference is local to the surging slice's cluster
    for (const UeState& ue : s.ues) {
        if (!cqi_before.count(ue.ue_id)) continue;
        if (ue.slice_id == "video")
            CHECK(ue.true_cqi <= cqi_before[ue.ue_id]);
        else
            CHECK(ue.true_cqi == cqi_before[ue.ue_id]);
    }
    bool some_dropped = false;
    for (const UeState& ue : s.ues)
        if (cqi_before.count(ue.ue_id) && ue.slice_id == "video" &&
            ue.true_cqi < cqi_before[ue.ue_id])
            some_dropped = true;
    CHECK(some_dropped);

    // the same seed reproduces the same surge population
    EnvState t = env_init(cfg, 9);
    t = env_step(cfg, t, none, 1);
    t = env_step(cfg, t, none, 2);
    REQUIRE(t.ues.size() == s.ues.size());
    for (std::size_t i = 0; i < s.ues.size(); ++i) CHECK(t.ues[i].x == s.ues[i].x);
}

TEST_CASE("route shift, background load and slice shutdown") {
    EnvConfig cfg = default_env_config();
    ScriptEvent shift{1, "route_shift", "ehealth", 1.0, 0.0, 3.0, 4.0};
    ScriptEvent load{1, "background_load", "iot", 2.5, 0.0, 0.0, 0.0};
    ScriptEvent down{2, "shutdown_slice", "video", 1.0, 0.0, 0.0, 0.0};
    cfg.script = {shift, load, down};
    EnvState s = env_init(cfg, 2);
    std::vector<ActionEvent> none;
    s = env_step(cfg, s, none, 1);
    for (const UeState& ue : s.ues) {
        if (ue.slice_id == "ehealth") {
            CHECK(ue.vx == 3.0);
            CHECK(ue.vy == 4.0);
        }
        if (ue.slice_id == "iot") CHECK(ue.demand_bps == doctest::Approx(1.25e5));
    }
    s = env_step(cfg, s, none, 2);
    CHECK(count_slice(s, "video") == 0);
    for (const SliceState& sl : s.slices)
        if (sl.slice_id == "video") CHECK(sl.allocated_prbs == 0);
}

TEST_CASE("monitoring field sets per level") {
    const auto& coarse = monitoring_fields(MonitoringLevel::coarse);
    const auto& fine = monitoring_fields(MonitoringLevel::fine);
    CHECK(coarse.size() == 6);
    CHECK(fine.size() == 9);
    for (const std::string& f : coarse)
        CHECK(std::find(fine.begin(), fine.end(), f) != fine.end());

    EnvConfig cfg = default_env_config();
    EnvState s = env_init(cfg, 4);
    LoopConfig loop;
    PenaltyLedger ledger;
    auto rc = monitor_collect(cfg, s, MonitoringLevel::coarse, &ledger, loop);
    REQUIRE(rc.size() == s.ues.size());
    std::set<std::string> keys;
    for (const auto& [k, v] : rc[0].metrics) keys.insert(k);
    CHECK(keys == std::set<std::string>{"demand_bps", "mcs1_dl", "wb_cqi"});
    CHECK(ledger.monitoring_cost == loop.coarse_cost_per_tick);

    auto rf = monitor_collect(cfg, s, MonitoringLevel::fine, &ledger, loop);
    keys.clear();
    for (const auto& [k, v] : rf[0].metrics) keys.insert(k);
    CHECK(keys == std::set<std::string>{"demand_bps", "mcs1_dl", "phr", "rsrp", "rsrq", "wb_cqi"});
    for (const auto& r : rf) {
        CHECK(r.metrics.at("rsrp") <= 0.0);
        CHECK(r.metrics.at("rsrq") <= -0.1);
    }
    CHECK(ledger.monitoring_cost == loop.coarse_cost_per_tick + loop.fine_cost_per_tick);
}

TEST_CASE("prediction availability follows the monitoring level") {
    EnvConfig cfg = default_env_config();
    EnvState s = env_init(cfg, 6);
    LoopConfig loop;
    PenaltyLedger ledger;
    auto coarse = monitor_collect(cfg, s, MonitoringLevel::coarse, &ledger, loop);
    auto fine = monitor_collect(cfg, s, MonitoringLevel::fine, &ledger, loop);

    features::FeatureSet needs_rsrp;
    needs_rsrp.base_features = {"rsrp"};
    DataTable train;
    train.add_numeric("rsrp", {-120.0, -60.0});
    auto [norm, params] = preprocess::normalize(train, {"rsrp"});
    needs_rsrp.normalization = params;

    models::TrainConfig tc;
    features::FeatureMatrix fm = features::expand_polynomial(norm, needs_rsrp);
    fm.y = {5.0, 14.0};
    auto model = std::make_shared<models::LinearModel>(models::train_lasso(fm, tc));

    PredictResult blocked = predict_step(*model, needs_rsrp, coarse, MonitoringLevel::coarse);
    CHECK_FALSE(blocked.available);
    CHECK(blocked.violations.size() == 5);

    PredictResult ok = predict_step(*model, needs_rsrp, fine, MonitoringLevel::fine);
    CHECK(ok.available);
    REQUIRE(ok.cqi.size() == fine.size());
    for (int c : ok.cqi) {
        CHECK(c >= 1);
        CHECK(c <= 15);
    }
}

TEST_CASE("decide_action allocates by priority within budget") {
    EnvConfig cfg = default_env_config();
    EnvState s = env_init(cfg, 8);
    std::vector<int> pred;
    for (const UeState& ue : s.ues) pred.push_back(ue.true_cqi);
    LoopConfig loop;
    std::vector<ActionEvent> acts = decide_action(cfg, s, pred, false, std::nullopt, loop, 5);
    int total = 0;
    std::map<std::string, int> alloc;
    for (const ActionEvent& a : acts) {
        CHECK(a.tick == 5);
        if (a.kind == ActionKind::reallocate_prbs) {
            total += a.prbs;
            alloc[a.slice_id] = a.prbs;
        }
    }
    CHECK(alloc.size() == 3);
    CHECK(total <= 120);
    CHECK(alloc["ehealth"] > 0);
}

TEST_CASE("shortfall degrades hd users on the lowest-priority slice first") {
    EnvConfig cfg = default_env_config();
    cfg.gnbs[0].total_prbs = 30;
    EnvState s = env_init(cfg, 10);
    std::vector<int> pred;
    for (const UeState& ue : s.ues) pred.push_back(ue.true_cqi);
    LoopConfig loop;
    std::vector<ActionEvent> acts = decide_action(cfg, s, pred, false, std::nullopt, loop, 0);
    bool saw_degrade = false;
    int total = 0;
    for (const ActionEvent& a : acts) {
        if (a.kind == ActionKind::degrade_to_sd) {
            saw_degrade = true;
            CHECK(a.slice_id == "video");  // only hd-capable population
        }
        if (a.kind == ActionKind::reallocate_prbs) total += a.prbs;
    }
    CHECK(saw_degrade);
    CHECK(total <= 30);
}

TEST_CASE("unavailable predictions escalate monitoring and freeze allocations") {
    EnvConfig cfg = default_env_config();
    EnvState s = env_init(cfg, 12);
    LoopConfig loop;
    std::vector<ActionEvent> acts = decide_action(cfg, s, {}, true, std::nullopt, loop, 3);
    REQUIRE(acts.size() == 1);
    CHECK(acts[0].kind == ActionKind::set_monitoring_level);
    CHECK(acts[0].monitoring_level == "fine");

    AnomalyVerdict v;
    v.detected = true;
    v.categorization.recommended_model_id = "m-alt";
    std::vector<ActionEvent> with_swap =
        decide_action(cfg, s, {}, true, v, loop, 3);
    REQUIRE(with_swap.size() == 2);
    CHECK(with_swap[1].kind == ActionKind::swap_model);
    CHECK(with_swap[1].model_id == "m-alt");

    CHECK_THROWS_AS(decide_action(cfg, s, {1, 2}, false, std::nullopt, loop, 0),
                    PreconditionError);
}

TEST_CASE("sla audit arithmetic at the guarantee boundary") {
    SlaSpec spec;
    spec.slice_id = "ehealth";
    spec.guarantee_quantile = 0.95;
    spec.penalty_per_violation_tick = 10.0;

    PenaltyLedger met;
    met.slices["ehealth"] = {4, 100, 40.0};  // 96 of 100 good
    auto v1 = sla_audit(met, {spec});
    REQUIRE(v1.count("ehealth"));
    CHECK(v1["ehealth"].met);
    CHECK(v1["ehealth"].good_fraction == doctest::Approx(0.96));

    PenaltyLedger missed;
    missed.slices["ehealth"] = {6, 100, 60.0};  // 94 of 100 good
    auto v2 = sla_audit(missed, {spec});
    CHECK_FALSE(v2["ehealth"].met);
    CHECK(v2["ehealth"].good_fraction == doctest::Approx(0.94));
    CHECK(v2["ehealth"].penalty == doctest::Approx(6.0 * 10.0));

    PenaltyLedger empty;
    CHECK(sla_audit(empty, {spec}).empty());
    PenaltyLedger zero;
    zero.slices["ehealth"] = {0, 0, 0.0};
    CHECK_THROWS_AS(sla_audit(zero, {spec}), PreconditionError);
}

TEST_CASE("run_loop is deterministic and keeps the invariants") {
    EnvConfig cfg = default_env_config();
    LoopConfig loop;
    loop.window_ticks = 10;
    features::FeatureSet fs;  // no base features: always available
    auto model = constant_model(9.0);
    RunResult a = run_loop(cfg, loop, model, fs, nullptr, nullptr, 40, 77);
    RunResult b = run_loop(cfg, loop, model, fs, nullptr, nullptr, 40, 77);
    CHECK(ledger_to_json(a.ledger) == ledger_to_json(b.ledger));
    CHECK(events_to_jsonl(a.events) == events_to_jsonl(b.events));
    CHECK(a.feedback.size() == b.feedback.size());
    CHECK(a.detection_ticks == b.detection_ticks);
    CHECK(a.prb_conservation_held);
    CHECK(a.priority_monotonicity_held);
    CHECK(a.feedback.size() == 12u * 40u);
    for (const auto& [id, p] : a.ledger.slices) CHECK(p.total_ticks == 40);

    RunResult none = run_loop(cfg, loop, model, fs, nullptr, nullptr, 0, 77);
    CHECK(none.events.empty());
    CHECK(none.feedback.empty());
    CHECK(none.ledger.slices.empty());
}

TEST_CASE("reactive and proactive controllers both run the default plant") {
    EnvConfig cfg = default_env_config();
    LoopConfig loop;
    loop.window_ticks = 10;
    loop.controller = ControllerKind::reactive;
    features::FeatureSet fs;
    auto model = constant_model(9.0);
    RunResult r = run_loop(cfg, loop, model, fs, nullptr, nullptr, 30, 5);
    CHECK(r.prb_conservation_held);
    CHECK(r.feedback.size() == 12u * 30u);
    // monitoring stays coarse for the reactive baseline
    CHECK(r.ledger.monitoring_cost == doctest::Approx(30.0 * loop.coarse_cost_per_tick));
}

TEST_CASE("env config json round trip") {
    EnvConfig cfg = default_env_config();
    cfg.script.push_back({100, "mie_surge", "video", 5.0, 12.0, 0.0, 0.0});
    cfg.noise_sigma_db = 0.75;
    cfg.gnbs[0].total_prbs = 99;
    EnvConfig back = env_config_from_json(env_config_to_json(cfg));
    CHECK(back.gnbs.size() == 1);
    CHECK(back.gnbs[0].total_prbs == 99);
    CHECK(back.cqi_efficiency == cfg.cqi_efficiency);
    CHECK(back.slices.size() == 3);
    CHECK(back.slices[0].slice_id == "ehealth");
    REQUIRE(back.script.size() == 1);
    CHECK(back.script[0].kind == "mie_surge");
    CHECK(back.script[0].factor == 5.0);
    CHECK(back.initial_ues == cfg.initial_ues);
    CHECK(back.initial_demand_bps == cfg.initial_demand_bps);
    CHECK(back.noise_sigma_db == 0.75);
}

TEST_CASE("action kind names are distinct") {
    std::set<std::string> names;
    for (ActionKind k : {ActionKind::reallocate_prbs, ActionKind::degrade_to_sd,
                         ActionKind::restore_hd, ActionKind::swap_model,
                         ActionKind::set_monitoring_level, ActionKind::reserve_resources,
                         ActionKind::noop})
        names.insert(action_kind_name(k));
    CHECK(names.size() == 7);
}
