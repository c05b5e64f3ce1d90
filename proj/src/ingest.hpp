#ifndef CNSM_INGEST_HPP
#define CNSM_INGEST_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "table.hpp"

namespace cnsm::ingest {

// One timestamped multi-layer metric sample for one UE.
struct MonitoringRecord {
    std::int64_t timestamp_ms = 0;
    std::string ue_id;
    std::string gnb_id;
    std::map<std::string, double> metrics;
};

enum class Mobility { static_ue, pedestrian, circular_drive, drive_away, random_waypoint };

const char* mobility_name(Mobility m);
Mobility mobility_from_name(const std::string& name);

struct TraceScenario {
    Mobility mobility = Mobility::static_ue;
    std::int64_t duration_ms = 60000;
    std::int64_t sample_period_ms = 10;
    double gnb_x = 0.0;
    double gnb_y = 0.0;
    double speed_mps = 1.5;
};

struct CorruptionSpec {
    int spike_value = 3;
    double spike_probability = 0.0;
    int max_run_length = 1;
};

// Log-distance path loss with a linear CQI quantization of the SINR
// proxy. All values configurable; defaults give CQI 15 near the mast
// down to 1 past ~1 km.
struct ChannelModel {
    double tx_power_dbm = 30.0;
    double ref_loss_db = 30.0;
    double exponent = 3.5;
    double noise_floor_dbm = -85.0;
    double sinr_lo_db = -5.0;
    double sinr_hi_db = 25.0;

    double path_loss(double distance_m) const;
    double rsrp(double distance_m) const;   // noise-free, clamped to <= 0 dBm
    double sinr(double distance_m) const;
    int cqi_from_sinr(double sinr_db) const;  // 15 uniform bins, clamped to 1..15
    double efficiency(int cqi) const;         // bits/s/Hz, strictly increasing
};

int mcs_from_cqi(int cqi);  // round(1.85 * cqi) clamped to 0..28

struct GeneratorConfig {
    std::uint64_t seed = 0;
    std::vector<TraceScenario> scenarios;
    double noise_sigma_db = 0.5;
    int static_field_count = 7;
    CorruptionSpec corruption;
    ChannelModel channel;
};

// The five-scenario desk-scale default (~30000 rows).
GeneratorConfig default_generator_config();

GeneratorConfig generator_config_from_json(const std::string& json_text);
std::string generator_config_to_json(const GeneratorConfig& cfg);

struct GeneratedTrace {
    DataTable observed;      // with injected corruption
    DataTable ground_truth;  // identical except uncorrupted wb_cqi
    std::vector<std::size_t> corrupted_rows;
};

GeneratedTrace generate_trace(const GeneratorConfig& cfg);

// Replaces seeded runs of wb_cqi cells with the spike value; returns the
// modified table and the exact corrupted row indices.
std::pair<DataTable, std::vector<std::size_t>> inject_corruption(const DataTable& table,
                                                                 const CorruptionSpec& spec,
                                                                 std::uint64_t seed);

// UTF-8 JSON-lines, one object per sample. Unknown numeric keys become
// extra columns; fields absent on a line become missing markers.
DataTable parse_records(const std::string& jsonl_text);
std::string serialize_records(const DataTable& table);

std::vector<MonitoringRecord> records_from_table(const DataTable& table);

}  // namespace cnsm::ingest

#endif
