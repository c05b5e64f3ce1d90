#include "pcs.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "error.hpp"
#include "json.hpp"

namespace cnsm::pcs {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

int budget_prbs(const EnvConfig& cfg) {
    int b = cfg.gnbs.empty() ? 0 : cfg.gnbs[0].total_prbs;
    for (const GnbConfig& g : cfg.gnbs) b = std::min(b, g.total_prbs);
    return b;
}

double efficiency(const EnvConfig& cfg, int cqi) {
    int i = std::clamp(cqi, 1, static_cast<int>(cfg.cqi_efficiency.size()));
    return cfg.cqi_efficiency[static_cast<std::size_t>(i - 1)];
}

const GnbConfig& nearest_gnb(const EnvConfig& cfg, double x, double y) {
    const GnbConfig* best = &cfg.gnbs.at(0);
    double bd = std::hypot(x - best->x, y - best->y);
    for (const GnbConfig& g : cfg.gnbs) {
        double d = std::hypot(x - g.x, y - g.y);
        if (d < bd) {
            bd = d;
            best = &g;
        }
    }
    return *best;
}

const SlaSpec& slice_spec(const EnvConfig& cfg, const std::string& id) {
    for (const SlaSpec& s : cfg.slices)
        if (s.slice_id == id) return s;
    throw PreconditionError("unknown slice: " + id);
}

void spawn_ue(const EnvConfig& cfg, EnvState& state, const std::string& slice_id,
              std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);
    std::uniform_real_distribution<double> radius(50.0, cfg.spawn_radius_m);
    UeState ue;
    ue.ue_id = "ue" + std::to_string(state.next_ue_serial++) + "_" + slice_id;
    ue.slice_id = slice_id;
    double a = angle(rng), r = radius(rng);
    ue.x = cfg.gnbs.at(0).x + r * std::cos(a);
    ue.y = cfg.gnbs.at(0).y + r * std::sin(a);
    auto it = cfg.initial_demand_bps.find(slice_id);
    ue.demand_bps = it != cfg.initial_demand_bps.end() ? it->second
                                                       : slice_spec(cfg, slice_id).min_throughput_bps;
    ue.hd_capable = ue.demand_bps >= cfg.hd_demand_bps;
    ue.tier = ue.hd_capable ? QualityTier::hd : QualityTier::sd;
    const GnbConfig& g = nearest_gnb(cfg, ue.x, ue.y);
    ue.serving_gnb = g.gnb_id;
    ue.true_cqi = cfg.channel.cqi_from_sinr(cfg.channel.sinr(std::hypot(ue.x - g.x, ue.y - g.y)));
    state.ues.push_back(std::move(ue));
}

void refresh_radio(const EnvConfig& cfg, EnvState& state) {
    for (UeState& ue : state.ues) {
        const GnbConfig& g = nearest_gnb(cfg, ue.x, ue.y);
        ue.serving_gnb = g.gnb_id;
        double interference = state.interference_db;
        auto it = state.slice_interference_db.find(ue.slice_id);
        if (it != state.slice_interference_db.end()) interference += it->second;
        double sinr = cfg.channel.sinr(std::hypot(ue.x - g.x, ue.y - g.y)) - interference;
        ue.true_cqi = cfg.channel.cqi_from_sinr(sinr);
    }
    // Need-weighted sharing inside each slice: PRBs are apportioned by
    // demand/efficiency, so a fully sized slice meets every UE's demand.
    std::map<std::string, double> slice_need_prbs;
    for (const UeState& ue : state.ues) {
        const GnbConfig& g = nearest_gnb(cfg, ue.x, ue.y);
        slice_need_prbs[ue.slice_id] +=
            ue.demand_bps / (g.prb_bandwidth_hz * efficiency(cfg, ue.true_cqi));
    }
    for (UeState& ue : state.ues) {
        int alloc = 0;
        for (const SliceState& s : state.slices)
            if (s.slice_id == ue.slice_id) alloc = s.allocated_prbs;
        double need = slice_need_prbs[ue.slice_id];
        ue.achieved_throughput_bps =
            need <= 0.0 ? 0.0 : ue.demand_bps * static_cast<double>(alloc) / need;
    }
}

}  // namespace

const char* action_kind_name(ActionKind k) {
    switch (k) {
        case ActionKind::reallocate_prbs: return "reallocate_prbs";
        case ActionKind::degrade_to_sd: return "degrade_to_sd";
        case ActionKind::restore_hd: return "restore_hd";
        case ActionKind::swap_model: return "swap_model";
        case ActionKind::set_monitoring_level: return "set_monitoring_level";
        case ActionKind::reserve_resources: return "reserve_resources";
        case ActionKind::noop: return "noop";
    }
    return "noop";
}

const std::vector<std::string>& monitoring_fields(MonitoringLevel level) {
    static const std::vector<std::string> coarse = {"timestamp_ms", "ue_id",      "gnb_id",
                                                    "wb_cqi",       "mcs1_dl",   "demand_bps"};
    static const std::vector<std::string> fine = {"timestamp_ms", "ue_id",  "gnb_id",
                                                  "wb_cqi",       "mcs1_dl", "demand_bps",
                                                  "rsrp",         "rsrq",    "phr"};
    return level == MonitoringLevel::fine ? fine : coarse;
}

EnvConfig default_env_config() {
    EnvConfig cfg;
    cfg.gnbs.push_back({"gnb0", 0.0, 0.0, 120, 180e3});
    cfg.cqi_efficiency = {0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141,
                          2.4063, 2.7305, 3.3223, 3.9023, 4.5234, 5.1152, 5.5547};
    cfg.slices.push_back({"ehealth", 2e6, 0.95, 10.0, 0});
    cfg.slices.push_back({"video", 2e6, 0.95, 2.0, 1});
    cfg.slices.push_back({"iot", 5e4, 0.95, 1.0, 2});
    cfg.initial_ues = {{"ehealth", 4}, {"video", 4}, {"iot", 4}};
    cfg.initial_demand_bps = {{"ehealth", 2e6}, {"video", 8e6}, {"iot", 5e4}};
    return cfg;
}

EnvState env_init(const EnvConfig& cfg, std::uint64_t seed) {
    if (cfg.gnbs.empty()) throw PreconditionError("env needs at least one gNB");
    if (cfg.cqi_efficiency.size() != 15)
        throw PreconditionError("cqi_efficiency must have exactly 15 entries");
    for (std::size_t i = 1; i < cfg.cqi_efficiency.size(); ++i)
        if (cfg.cqi_efficiency[i] <= cfg.cqi_efficiency[i - 1])
            throw PreconditionError("cqi_efficiency must be strictly increasing");
    EnvState state;
    state.seed = seed;
    std::mt19937_64 rng(splitmix64(seed));
    int even = cfg.slices.empty() ? 0 : budget_prbs(cfg) / static_cast<int>(cfg.slices.size());
    for (const SlaSpec& s : cfg.slices) {
        state.slices.push_back({s.slice_id, even});
        auto it = cfg.initial_ues.find(s.slice_id);
        int n = it != cfg.initial_ues.end() ? it->second : 0;
        for (int i = 0; i < n; ++i) spawn_ue(cfg, state, s.slice_id, rng);
    }
    refresh_radio(cfg, state);
    return state;
}

EnvState env_step(const EnvConfig& cfg, const EnvState& state, std::vector<ActionEvent>& actions,
                  std::int64_t tick) {
    EnvState next = state;
    next.tick = tick;

    // PRB reallocations are validated as a set against the budget.
    std::map<std::string, int> proposal;
    for (const SliceState& s : next.slices) proposal[s.slice_id] = s.allocated_prbs;
    bool any_realloc = false;
    for (const ActionEvent& a : actions) {
        if (a.kind == ActionKind::reallocate_prbs) {
            proposal[a.slice_id] = a.prbs;
            any_realloc = true;
        }
    }
    int total = 0;
    for (const auto& [id, prbs] : proposal) total += prbs;
    bool over = total > budget_prbs(cfg);
    for (ActionEvent& a : actions) {
        switch (a.kind) {
            case ActionKind::reallocate_prbs:
                if (over || a.prbs < 0) {
                    a.rejected = true;
                } else {
                    for (SliceState& s : next.slices)
                        if (s.slice_id == a.slice_id) s.allocated_prbs = a.prbs;
                }
                break;
            case ActionKind::degrade_to_sd:
                for (UeState& ue : next.ues)
                    if (ue.ue_id == a.ue_id && ue.tier == QualityTier::hd) {
                        ue.tier = QualityTier::sd;
                        ue.demand_bps = cfg.sd_demand_bps;
                    }
                break;
            case ActionKind::restore_hd:
                for (UeState& ue : next.ues)
                    if (ue.ue_id == a.ue_id && ue.hd_capable) {
                        ue.tier = QualityTier::hd;
                        ue.demand_bps = cfg.hd_demand_bps;
                    }
                break;
            default:
                break;  // loop-internal actions have no plant effect
        }
    }
    (void)any_realloc;

    for (const ScriptEvent& ev : cfg.script) {
        if (ev.tick != tick) continue;
        if (ev.kind == "mie_surge") {
            std::mt19937_64 rng(splitmix64(state.seed ^ (0x5123ULL * static_cast<std::uint64_t>(tick + 1))));
            std::vector<UeState> existing;
            for (const UeState& ue : next.ues)
                if (ue.slice_id == ev.slice_id) existing.push_back(ue);
            std::size_t extra = existing.empty()
                                    ? 0
                                    : static_cast<std::size_t>(
                                          std::llround(existing.size() * (ev.factor - 1.0)));
            for (std::size_t i = 0; i < extra; ++i) spawn_ue(cfg, next, ev.slice_id, rng);
            next.slice_interference_db[ev.slice_id] += ev.interference_db;
        } else if (ev.kind == "route_shift") {
            for (UeState& ue : next.ues)
                if (ue.slice_id == ev.slice_id) {
                    ue.vx = ev.vx;
                    ue.vy = ev.vy;
                }
        } else if (ev.kind == "background_load") {
            for (UeState& ue : next.ues)
                if (ue.slice_id == ev.slice_id) ue.demand_bps *= ev.factor;
        } else if (ev.kind == "shutdown_slice") {
            next.ues.erase(std::remove_if(next.ues.begin(), next.ues.end(),
                                          [&](const UeState& ue) {
                                              return ue.slice_id == ev.slice_id;
                                          }),
                           next.ues.end());
            for (SliceState& s : next.slices)
                if (s.slice_id == ev.slice_id) s.allocated_prbs = 0;
        }
    }

    for (UeState& ue : next.ues) {
        ue.x += ue.vx;
        ue.y += ue.vy;
    }
    refresh_radio(cfg, next);
    return next;
}

std::vector<ingest::MonitoringRecord> monitor_collect(const EnvConfig& cfg, const EnvState& state,
                                                      MonitoringLevel level,
                                                      PenaltyLedger* ledger,
                                                      const LoopConfig& loop) {
    std::vector<ingest::MonitoringRecord> out;
    std::mt19937_64 rng(
        splitmix64(state.seed ^ (0xab1eULL + 0x51ULL * static_cast<std::uint64_t>(state.tick))));
    std::normal_distribution<double> gauss(0.0, 1.0);
    double sigma = cfg.noise_sigma_db;
    const ingest::ChannelModel& ch = cfg.channel;
    double sinr_span = ch.sinr_hi_db - ch.sinr_lo_db;
    for (const UeState& ue : state.ues) {
        ingest::MonitoringRecord r;
        r.timestamp_ms = state.tick * loop.tick_ms;
        r.ue_id = ue.ue_id;
        r.gnb_id = ue.serving_gnb;
        r.metrics["wb_cqi"] = ue.true_cqi;
        r.metrics["mcs1_dl"] = ingest::mcs_from_cqi(ue.true_cqi);
        r.metrics["demand_bps"] = ue.demand_bps;
        if (level == MonitoringLevel::fine) {
            const GnbConfig& g = nearest_gnb(cfg, ue.x, ue.y);
            double dist = std::hypot(ue.x - g.x, ue.y - g.y);
            // Reference-signal measures: geometry-driven, blind to the
            // uplink interference floor.
            double sinr_det = ch.sinr(dist);
            r.metrics["rsrp"] =
                std::min(ch.rsrp(dist) + (sigma > 0 ? sigma * gauss(rng) : 0.0), 0.0);
            double frac = std::clamp((sinr_det - ch.sinr_lo_db) / sinr_span, 0.0, 1.0);
            r.metrics["rsrq"] = std::min(
                -19.5 + 16.5 * frac + (sigma > 0 ? 0.5 * sigma * gauss(rng) : 0.0), -0.1);
            r.metrics["phr"] =
                40.0 - 0.25 * ch.path_loss(dist) + (sigma > 0 ? sigma * gauss(rng) : 0.0);
        }
        out.push_back(std::move(r));
    }
    if (ledger != nullptr)
        ledger->monitoring_cost +=
            level == MonitoringLevel::fine ? loop.fine_cost_per_tick : loop.coarse_cost_per_tick;
    return out;
}

PredictResult predict_step(const models::Model& model, const features::FeatureSet& fs,
                           const std::vector<ingest::MonitoringRecord>& records,
                           MonitoringLevel level) {
    PredictResult out;
    out.violations = features::feature_availability_check(fs, monitoring_fields(level));
    if (!out.violations.empty()) return out;
    out.available = true;
    for (const ingest::MonitoringRecord& r : records) {
        std::vector<std::pair<std::string, double>> raw;
        for (const std::string& base : fs.base_features) {
            auto it = r.metrics.find(base);
            if (it == r.metrics.end())
                throw PreconditionError("record lacks feature " + base);
            raw.emplace_back(base, it->second);
        }
        out.cqi.push_back(model.predict_cqi(features::expand_row(fs, raw)));
    }
    return out;
}

std::vector<ActionEvent> decide_action(const EnvConfig& cfg, const EnvState& state,
                                       const std::vector<int>& predicted_cqi,
                                       bool predict_unavailable,
                                       const std::optional<AnomalyVerdict>& verdict,
                                       const LoopConfig& loop, std::int64_t tick) {
    std::vector<ActionEvent> actions;

    // Internal ML loop.
    if (predict_unavailable) {
        ActionEvent a;
        a.tick = tick;
        a.kind = ActionKind::set_monitoring_level;
        a.monitoring_level = "fine";
        a.note = "predict-unavailable";
        actions.push_back(a);
    }
    if (verdict && verdict->detected && !verdict->categorization.recommended_model_id.empty()) {
        ActionEvent a;
        a.tick = tick;
        a.kind = ActionKind::swap_model;
        a.model_id = verdict->categorization.recommended_model_id;
        a.note = anomaly::anomaly_class_name(verdict->categorization.cls);
        actions.push_back(a);
    }
    if (predict_unavailable) return actions;  // keep current allocations this tick

    if (predicted_cqi.size() != state.ues.size())
        throw PreconditionError("decide_action: prediction count mismatch");

    // Network loop: greedy allocation by slice priority.
    std::vector<const SlaSpec*> order;
    for (const SlaSpec& s : cfg.slices) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(), [](const SlaSpec* a, const SlaSpec* b) {
        return a->priority != b->priority ? a->priority < b->priority
                                          : a->slice_id < b->slice_id;
    });

    double prb_bw = cfg.gnbs.at(0).prb_bandwidth_hz;
    auto ue_prbs = [&](const UeState& ue, int cqi, double demand) {
        double target = std::max(slice_spec(cfg, ue.slice_id).min_throughput_bps, demand);
        return static_cast<int>(std::ceil(target / (prb_bw * efficiency(cfg, cqi))));
    };

    // Working copy of per-UE demand so degradations feed the sizing pass.
    std::map<std::string, double> demand;
    std::map<std::string, std::vector<std::size_t>> slice_ues;
    for (std::size_t i = 0; i < state.ues.size(); ++i) {
        demand[state.ues[i].ue_id] = state.ues[i].demand_bps;
        slice_ues[state.ues[i].slice_id].push_back(i);
    }

    auto slice_need = [&](const SlaSpec& s) {
        int need = 0;
        for (std::size_t i : slice_ues[s.slice_id])
            need += ue_prbs(state.ues[i], predicted_cqi[i], demand[state.ues[i].ue_id]);
        return need;
    };

    int budget = budget_prbs(cfg);
    int reserve = loop.controller == ControllerKind::proactive ? loop.reserve_margin_prbs : 0;

    auto total_need = [&]() {
        int t = reserve;
        for (const SlaSpec* s : order) t += slice_need(*s);
        return t;
    };

    // Shortfall: degrade HD UEs from the lowest priority upward.
    if (total_need() > budget) {
        for (auto it = order.rbegin(); it != order.rend() && total_need() > budget; ++it) {
            for (std::size_t i : slice_ues[(*it)->slice_id]) {
                const UeState& ue = state.ues[i];
                if (ue.tier == QualityTier::hd && demand[ue.ue_id] > cfg.sd_demand_bps) {
                    demand[ue.ue_id] = cfg.sd_demand_bps;
                    ActionEvent a;
                    a.tick = tick;
                    a.kind = ActionKind::degrade_to_sd;
                    a.slice_id = ue.slice_id;
                    a.ue_id = ue.ue_id;
                    actions.push_back(a);
                    if (total_need() <= budget) break;
                }
            }
        }
    }

    // Allocate top-down; the lowest priorities absorb any remaining gap.
    int remaining = budget;
    bool first = true;
    for (const SlaSpec* s : order) {
        int want = slice_need(*s) + (first ? reserve : 0);
        int give = std::min(want, std::max(remaining, 0));
        ActionEvent a;
        a.tick = tick;
        a.kind = ActionKind::reallocate_prbs;
        a.slice_id = s->slice_id;
        a.prbs = give;
        if (first && reserve > 0) a.note = "includes reserve margin";
        actions.push_back(a);
        remaining -= give;
        first = false;
    }
    return actions;
}

std::map<std::string, SliceVerdict> sla_audit(const PenaltyLedger& ledger,
                                              const std::vector<SlaSpec>& specs) {
    std::map<std::string, SliceVerdict> out;
    for (const SlaSpec& s : specs) {
        auto it = ledger.slices.find(s.slice_id);
        if (it == ledger.slices.end()) continue;
        const SlicePenalty& p = it->second;
        if (p.total_ticks <= 0) throw PreconditionError("sla_audit: no ticks for " + s.slice_id);
        SliceVerdict v;
        v.good_fraction = 1.0 - static_cast<double>(p.violation_ticks) /
                                    static_cast<double>(p.total_ticks);
        v.met = v.good_fraction >= s.guarantee_quantile;
        v.penalty = p.accrued_penalty;
        out[s.slice_id] = v;
    }
    return out;
}

RunResult run_loop(const EnvConfig& cfg, const LoopConfig& loop,
                   const std::shared_ptr<models::Model>& model, const features::FeatureSet& fs,
                   const anomaly::ClusterModel* clusters, kb::KnowledgeBase* kb,
                   std::int64_t ticks, std::uint64_t seed) {
    RunResult result;
    EnvState state = env_init(cfg, seed);
    MonitoringLevel level = loop.monitoring_level;
    std::shared_ptr<models::Model> current = model;
    std::vector<ActionEvent> pending;
    std::vector<int> prev_observed;  // reactive controller input, one tick behind

    std::vector<ingest::MonitoringRecord> window_records;
    std::vector<double> window_preds;
    std::vector<anomaly::Window> history;
    std::optional<AnomalyVerdict> verdict;

    for (std::int64_t tick = 0; tick < ticks; ++tick) {
        state = env_step(cfg, state, pending, tick);
        for (const ActionEvent& a : pending) result.events.push_back(a);
        pending.clear();

        // Invariant bookkeeping.
        int alloc_total = 0;
        for (const SliceState& s : state.slices) alloc_total += s.allocated_prbs;
        if (alloc_total > budget_prbs(cfg)) result.prb_conservation_held = false;
        for (const UeState& a : state.ues) {
            if (!(a.hd_capable && a.tier == QualityTier::sd)) continue;
            for (const UeState& b : state.ues) {
                if (b.tier == QualityTier::hd &&
                    slice_spec(cfg, b.slice_id).priority >
                        slice_spec(cfg, a.slice_id).priority)
                    result.priority_monotonicity_held = false;
            }
        }

        std::vector<ingest::MonitoringRecord> records =
            monitor_collect(cfg, state, level, &result.ledger, loop);

        PredictResult pr;
        if (loop.controller == ControllerKind::proactive) {
            pr = predict_step(*current, fs, records, level);
        } else {
            // Reactive baseline: last tick's observations stand in for a
            // forecast; the first tick reuses the current reading.
            pr.available = true;
            if (prev_observed.size() == records.size()) {
                pr.cqi = prev_observed;
            } else {
                for (const ingest::MonitoringRecord& r : records)
                    pr.cqi.push_back(static_cast<int>(r.metrics.at("wb_cqi")));
            }
        }
        prev_observed.clear();
        for (const ingest::MonitoringRecord& r : records)
            prev_observed.push_back(static_cast<int>(r.metrics.at("wb_cqi")));

        if (pr.available) {
            for (std::size_t i = 0; i < records.size(); ++i) {
                kb::FeedbackEntry fb;
                fb.tick = tick;
                fb.predicted = pr.cqi[i];
                fb.observed = records[i].metrics.at("wb_cqi");
                result.feedback.push_back(fb);
                if (kb != nullptr) kb->append_feedback(fb);
            }
            for (std::size_t i = 0; i < records.size(); ++i) {
                window_records.push_back(records[i]);
                window_preds.push_back(static_cast<double>(pr.cqi[i]));
            }
        }

        verdict.reset();
        if ((tick + 1) % loop.window_ticks == 0 && !window_records.empty()) {
            anomaly::Window w = anomaly::summarize_window(window_records, window_preds,
                                                          tick + 1 - loop.window_ticks, tick + 1);
            auto score = anomaly::score_window(history, w, loop.score);
            if (score && anomaly::detect(*score)) {
                AnomalyVerdict v;
                v.detected = true;
                if (clusters != nullptr && !clusters->labels.empty())
                    v.categorization = anomaly::categorize(*clusters, w);
                verdict = v;
                result.detection_ticks.push_back(tick);
            }
            history.push_back(w);
            window_records.clear();
            window_preds.clear();
        }

        pending = decide_action(cfg, state, pr.cqi, !pr.available, verdict, loop, tick);
        for (const ActionEvent& a : pending) {
            if (a.kind == ActionKind::set_monitoring_level)
                level = a.monitoring_level == "fine" ? MonitoringLevel::fine
                                                     : MonitoringLevel::coarse;
            if (a.kind == ActionKind::swap_model && kb != nullptr &&
                kb->find_model(a.model_id) != nullptr)
                current = models::model_from_json(kb->get_model_artifact(a.model_id));
        }

        // SLA bookkeeping on the post-step state.
        for (const SlaSpec& s : cfg.slices) {
            SlicePenalty& p = result.ledger.slices[s.slice_id];
            ++p.total_ticks;
            bool violated = false;
            for (const UeState& ue : state.ues)
                if (ue.slice_id == s.slice_id &&
                    ue.achieved_throughput_bps < s.min_throughput_bps)
                    violated = true;
            if (violated) {
                ++p.violation_ticks;
                p.accrued_penalty += s.penalty_per_violation_tick;
            }
        }
    }
    return result;
}

// ---- serialization ----

std::string env_config_to_json(const EnvConfig& cfg) {
    json j;
    j["gnbs"] = json::array();
    for (const GnbConfig& g : cfg.gnbs)
        j["gnbs"].push_back({{"gnb_id", g.gnb_id},
                             {"x", g.x},
                             {"y", g.y},
                             {"total_prbs", g.total_prbs},
                             {"prb_bandwidth_hz", g.prb_bandwidth_hz}});
    j["channel"] = {{"tx_power_dbm", cfg.channel.tx_power_dbm},
                    {"ref_loss_db", cfg.channel.ref_loss_db},
                    {"exponent", cfg.channel.exponent},
                    {"noise_floor_dbm", cfg.channel.noise_floor_dbm},
                    {"sinr_lo_db", cfg.channel.sinr_lo_db},
                    {"sinr_hi_db", cfg.channel.sinr_hi_db}};
    j["cqi_efficiency"] = cfg.cqi_efficiency;
    j["slices"] = json::array();
    for (const SlaSpec& s : cfg.slices)
        j["slices"].push_back({{"slice_id", s.slice_id},
                               {"min_throughput_bps", s.min_throughput_bps},
                               {"guarantee_quantile", s.guarantee_quantile},
                               {"penalty_per_violation_tick", s.penalty_per_violation_tick},
                               {"priority", s.priority}});
    j["script"] = json::array();
    for (const ScriptEvent& e : cfg.script)
        j["script"].push_back({{"tick", e.tick},
                               {"kind", e.kind},
                               {"slice_id", e.slice_id},
                               {"factor", e.factor},
                               {"interference_db", e.interference_db},
                               {"vx", e.vx},
                               {"vy", e.vy}});
    j["initial_ues"] = cfg.initial_ues;
    j["initial_demand_bps"] = cfg.initial_demand_bps;
    j["spawn_radius_m"] = cfg.spawn_radius_m;
    j["hd_demand_bps"] = cfg.hd_demand_bps;
    j["sd_demand_bps"] = cfg.sd_demand_bps;
    j["noise_sigma_db"] = cfg.noise_sigma_db;
    return j.dump(2);
}

EnvConfig env_config_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    EnvConfig cfg = default_env_config();
    if (j.contains("gnbs")) {
        cfg.gnbs.clear();
        for (const json& g : j["gnbs"])
            cfg.gnbs.push_back({g.at("gnb_id").get<std::string>(), g.value("x", 0.0),
                                g.value("y", 0.0), g.at("total_prbs").get<int>(),
                                g.value("prb_bandwidth_hz", 180e3)});
    }
    if (j.contains("channel")) {
        const json& c = j["channel"];
        if (c.contains("tx_power_dbm")) cfg.channel.tx_power_dbm = c["tx_power_dbm"];
        if (c.contains("ref_loss_db")) cfg.channel.ref_loss_db = c["ref_loss_db"];
        if (c.contains("exponent")) cfg.channel.exponent = c["exponent"];
        if (c.contains("noise_floor_dbm")) cfg.channel.noise_floor_dbm = c["noise_floor_dbm"];
        if (c.contains("sinr_lo_db")) cfg.channel.sinr_lo_db = c["sinr_lo_db"];
        if (c.contains("sinr_hi_db")) cfg.channel.sinr_hi_db = c["sinr_hi_db"];
    }
    if (j.contains("cqi_efficiency"))
        cfg.cqi_efficiency = j["cqi_efficiency"].get<std::vector<double>>();
    if (j.contains("slices")) {
        cfg.slices.clear();
        for (const json& s : j["slices"])
            cfg.slices.push_back({s.at("slice_id").get<std::string>(),
                                  s.value("min_throughput_bps", 2e6),
                                  s.value("guarantee_quantile", 0.95),
                                  s.value("penalty_per_violation_tick", 1.0),
                                  s.value("priority", 0)});
    }
    if (j.contains("script")) {
        cfg.script.clear();
        for (const json& e : j["script"]) {
            ScriptEvent ev;
            ev.tick = e.at("tick").get<std::int64_t>();
            ev.kind = e.at("kind").get<std::string>();
            ev.slice_id = e.value("slice_id", "");
            ev.factor = e.value("factor", 1.0);
            ev.interference_db = e.value("interference_db", 0.0);
            ev.vx = e.value("vx", 0.0);
            ev.vy = e.value("vy", 0.0);
            cfg.script.push_back(ev);
        }
    }
    if (j.contains("initial_ues"))
        cfg.initial_ues = j["initial_ues"].get<std::map<std::string, int>>();
    if (j.contains("initial_demand_bps"))
        cfg.initial_demand_bps = j["initial_demand_bps"].get<std::map<std::string, double>>();
    if (j.contains("spawn_radius_m")) cfg.spawn_radius_m = j["spawn_radius_m"];
    if (j.contains("hd_demand_bps")) cfg.hd_demand_bps = j["hd_demand_bps"];
    if (j.contains("sd_demand_bps")) cfg.sd_demand_bps = j["sd_demand_bps"];
    if (j.contains("noise_sigma_db")) cfg.noise_sigma_db = j["noise_sigma_db"];
    return cfg;
}

std::string ledger_to_json(const PenaltyLedger& ledger) {
    json j;
    j["monitoring_cost"] = ledger.monitoring_cost;
    j["slices"] = json::object();
    for (const auto& [id, p] : ledger.slices)
        j["slices"][id] = {{"violation_ticks", p.violation_ticks},
                           {"total_ticks", p.total_ticks},
                           {"accrued_penalty", p.accrued_penalty}};
    return j.dump(2);
}

std::string events_to_jsonl(const std::vector<ActionEvent>& events) {
    std::ostringstream os;
    for (const ActionEvent& a : events) {
        json j = {{"tick", a.tick},
                  {"kind", action_kind_name(a.kind)},
                  {"slice_id", a.slice_id},
                  {"prbs", a.prbs},
                  {"model_id", a.model_id},
                  {"monitoring_level", a.monitoring_level},
                  {"ue_id", a.ue_id},
                  {"rejected", a.rejected},
                  {"note", a.note}};
        os << j.dump() << '\n';
    }
    return os.str();
}

}  // namespace cnsm::pcs
