#ifndef CNSM_PCS_HPP
#define CNSM_PCS_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "anomaly.hpp"
#include "features.hpp"
#include "ingest.hpp"
#include "kb.hpp"
#include "models.hpp"

namespace cnsm::pcs {

struct SlaSpec {
    std::string slice_id;
    double min_throughput_bps = 2e6;
    double guarantee_quantile = 0.95;
    double penalty_per_violation_tick = 1.0;
    int priority = 0;  // lower = higher priority
};

enum class QualityTier { hd, sd };

struct UeState {
    std::string ue_id;
    std::string slice_id;
    double x = 0.0, y = 0.0;
    double vx = 0.0, vy = 0.0;
    std::string serving_gnb;
    double demand_bps = 0.0;
    QualityTier tier = QualityTier::hd;
    bool hd_capable = false;
    int true_cqi = 15;
    double achieved_throughput_bps = 0.0;
};

struct SliceState {
    std::string slice_id;
    int allocated_prbs = 0;
};

struct GnbConfig {
    std::string gnb_id;
    double x = 0.0, y = 0.0;
    int total_prbs = 100;
    double prb_bandwidth_hz = 180e3;
};

// Timed plant perturbations. mie_surge multiplies a slice's UE count and
// raises the interference floor; route_shift redirects UE velocities;
// background_load scales demand; shutdown_slice is manual-only.
struct ScriptEvent {
    std::int64_t tick = 0;
    std::string kind;  // mie_surge | route_shift | background_load | shutdown_slice
    std::string slice_id;
    double factor = 1.0;
    double interference_db = 0.0;
    double vx = 0.0, vy = 0.0;  // route_shift target velocity
};

struct EnvConfig {
    std::vector<GnbConfig> gnbs;
    ingest::ChannelModel channel;
    std::vector<double> cqi_efficiency;  // 15 entries, strictly increasing
    std::vector<SlaSpec> slices;
    std::vector<ScriptEvent> script;
    // Initial population: UEs per slice, spawned around the first gNB.
    std::map<std::string, int> initial_ues;
    // Per-slice per-UE demand; defaults to the slice's SLA minimum. A UE
    // is HD-capable (degradable) iff its initial demand reaches hd_demand.
    std::map<std::string, double> initial_demand_bps;
    double spawn_radius_m = 200.0;
    double hd_demand_bps = 8e6;
    double sd_demand_bps = 2.5e6;
    double noise_sigma_db = 0.5;  // observation noise on reported CQI inputs
};

std::string env_config_to_json(const EnvConfig& cfg);
EnvConfig env_config_from_json(const std::string& json_text);
EnvConfig default_env_config();

struct EnvState {
    std::int64_t tick = 0;
    std::vector<UeState> ues;
    std::vector<SliceState> slices;
    double interference_db = 0.0;  // area-wide floor
    // Extra interference local to one slice's device cluster (MIE model).
    std::map<std::string, double> slice_interference_db;
    std::uint64_t seed = 0;
    int next_ue_serial = 0;
};

enum class ActionKind {
    reallocate_prbs,
    degrade_to_sd,
    restore_hd,
    swap_model,
    set_monitoring_level,
    reserve_resources,
    noop
};
const char* action_kind_name(ActionKind k);

struct ActionEvent {
    std::int64_t tick = 0;
    ActionKind kind = ActionKind::noop;
    std::string slice_id;            // reallocate / degrade / restore
    int prbs = 0;                    // reallocate / reserve
    std::string model_id;            // swap_model
    std::string monitoring_level;    // set_monitoring_level
    std::string ue_id;               // degrade / restore target
    bool rejected = false;           // budget-violating reallocations
    std::string note;
};

struct SlicePenalty {
    std::int64_t violation_ticks = 0;
    std::int64_t total_ticks = 0;
    double accrued_penalty = 0.0;
};

struct PenaltyLedger {
    std::map<std::string, SlicePenalty> slices;
    double monitoring_cost = 0.0;
};

enum class MonitoringLevel { coarse, fine };
enum class ControllerKind { reactive, proactive };

struct LoopConfig {
    std::int64_t tick_ms = 100;
    MonitoringLevel monitoring_level = MonitoringLevel::coarse;
    double coarse_cost_per_tick = 1.0;
    double fine_cost_per_tick = 3.0;
    int reserve_margin_prbs = 5;
    ControllerKind controller = ControllerKind::proactive;
    std::int64_t window_ticks = 50;  // anomaly aggregation window
    anomaly::ScoreConfig score;
};

// Field sets per monitoring level; fine is a strict superset.
const std::vector<std::string>& monitoring_fields(MonitoringLevel level);

EnvState env_init(const EnvConfig& cfg, std::uint64_t seed);

// Applies valid actions, advances motion and scripted events, recomputes
// true CQI and achieved throughput. Budget-violating reallocations are
// marked rejected and skipped.
EnvState env_step(const EnvConfig& cfg, const EnvState& state, std::vector<ActionEvent>& actions,
                  std::int64_t tick);

std::vector<ingest::MonitoringRecord> monitor_collect(const EnvConfig& cfg, const EnvState& state,
                                                      MonitoringLevel level,
                                                      PenaltyLedger* ledger,
                                                      const LoopConfig& loop);

struct PredictResult {
    bool available = false;
    std::vector<std::string> violations;  // availability failures
    std::vector<int> cqi;                 // per record, rounded/clamped 1..15
};

PredictResult predict_step(const models::Model& model, const features::FeatureSet& fs,
                           const std::vector<ingest::MonitoringRecord>& records,
                           MonitoringLevel level);

struct AnomalyVerdict {
    bool detected = false;
    anomaly::Categorization categorization;
};

std::vector<ActionEvent> decide_action(const EnvConfig& cfg, const EnvState& state,
                                       const std::vector<int>& predicted_cqi,
                                       bool predict_unavailable,
                                       const std::optional<AnomalyVerdict>& verdict,
                                       const LoopConfig& loop, std::int64_t tick);

struct RunResult {
    PenaltyLedger ledger;
    std::vector<ActionEvent> events;
    std::vector<kb::FeedbackEntry> feedback;
    std::vector<std::int64_t> detection_ticks;  // ticks whose window scored anomalous
    bool prb_conservation_held = true;
    bool priority_monotonicity_held = true;
};

// The full State -> Monitor -> Predict -> Action loop. The cluster model
// and KB are optional; with a KB, feedback is also appended to its log.
RunResult run_loop(const EnvConfig& cfg, const LoopConfig& loop,
                   const std::shared_ptr<models::Model>& model, const features::FeatureSet& fs,
                   const anomaly::ClusterModel* clusters, kb::KnowledgeBase* kb,
                   std::int64_t ticks, std::uint64_t seed);

struct SliceVerdict {
    bool met = false;
    double good_fraction = 0.0;
    double penalty = 0.0;
};

std::map<std::string, SliceVerdict> sla_audit(const PenaltyLedger& ledger,
                                              const std::vector<SlaSpec>& specs);

std::string ledger_to_json(const PenaltyLedger& ledger);
std::string events_to_jsonl(const std::vector<ActionEvent>& events);

}  // namespace cnsm::pcs

#endif
