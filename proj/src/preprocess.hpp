#ifndef CNSM_PREPROCESS_HPP
#define CNSM_PREPROCESS_HPP

#include <string>
#include <utility>
#include <vector>

#include "table.hpp"

namespace cnsm::preprocess {

struct RepairedCell {
    std::size_t row;
    std::string column;
    double old_value;
    double new_value;
};

struct RepairReport {
    std::vector<RepairedCell> repaired_cells;
    std::string method;
    std::string detector;
};

std::string repair_report_to_json(const RepairReport& report);

// Flags cells outside [valid_lo, valid_hi] or missing. Short runs get the
// median of the nearest non-flagged neighbors, long runs the mean of the
// preceding time window.
struct RepairConfig {
    double valid_lo = 0.0;
    double valid_hi = 0.0;
    int neighbor_window = 4;   // non-flagged values consulted for the median
    int run_threshold = 5;     // runs longer than this use the window mean
    double window_ms = 100.0;  // preceding window for long runs
};

struct SpikeConfig {
    std::string target = "wb_cqi";
    double spike_delta = 4.0;  // CQI steps vs the centered rolling median
    int half_window = 50;      // neighbors consulted on each side
};

// Appends dt_ms = timestamp - previous timestamp per UE (first row 0).
DataTable add_relative_timestamps(const DataTable& table);

std::pair<DataTable, std::vector<std::string>> prune_static_fields(const DataTable& table);

std::pair<DataTable, RepairReport> repair_values(const DataTable& table,
                                                 const std::string& column,
                                                 const RepairConfig& cfg);

std::pair<DataTable, RepairReport> repair_target_spikes(const DataTable& table,
                                                        const SpikeConfig& cfg = {});

struct NormalizationParams {
    std::vector<std::string> names;
    std::vector<double> min;
    std::vector<double> max;
    std::vector<bool> degenerate;

    int index_of(const std::string& name) const;
};

std::string normalization_to_json(const NormalizationParams& params);
NormalizationParams normalization_from_json(const std::string& json_text);

// Min-max scaling to [0,1] over the named columns. With params supplied
// (the validation/runtime path) the stored ranges are applied and outputs
// clamped; degenerate columns map to 0.
std::pair<DataTable, NormalizationParams> normalize(const DataTable& table,
                                                    const std::vector<std::string>& columns,
                                                    const NormalizationParams* params = nullptr);

std::vector<double> denormalize(const NormalizationParams& params, const std::string& column,
                                const std::vector<double>& values);

}  // namespace cnsm::preprocess

#endif
