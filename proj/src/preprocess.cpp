#include "preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "error.hpp"
#include "json.hpp"

namespace cnsm::preprocess {

using nlohmann::json;

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n == 0) return kMissing;
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Contiguous per-UE segments, in row order. Without a ue_id column the
// whole table is one segment.
std::vector<std::pair<std::size_t, std::size_t>> ue_segments(const DataTable& table) {
    std::vector<std::pair<std::size_t, std::size_t>> segs;
    std::size_t n = table.row_count();
    if (n == 0) return segs;
    int ue_idx = table.index_of("ue_id");
    if (ue_idx < 0 || !table.col(ue_idx).text) {
        segs.emplace_back(0, n);
        return segs;
    }
    const auto& ue = table.col(ue_idx).str;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i == n || ue[i] != ue[start]) {
            segs.emplace_back(start, i);
            start = i;
        }
    }
    return segs;
}

}  // namespace

DataTable add_relative_timestamps(const DataTable& table) {
    const std::vector<double>& ts = table.num("timestamp_ms");
    std::vector<double> dt(ts.size(), 0.0);
    for (auto [lo, hi] : ue_segments(table)) {
        for (std::size_t i = lo + 1; i < hi; ++i) {
            if (ts[i] <= ts[i - 1])
                throw PreconditionError("timestamps not strictly increasing at row " +
                                        std::to_string(i));
            dt[i] = ts[i] - ts[i - 1];
        }
    }
    DataTable out = table;
    if (out.has("dt_ms")) out.remove("dt_ms");
    out.add_numeric("dt_ms", std::move(dt));
    return out;
}

std::pair<DataTable, std::vector<std::string>> prune_static_fields(const DataTable& table) {
    // Structural columns and the target survive even when constant.
    static const char* kProtected[] = {"timestamp_ms", "dt_ms", "wb_cqi"};
    DataTable out = table;
    std::vector<std::string> removed;
    for (const Column& c : table.columns()) {
        if (c.text) continue;
        bool prot = false;
        for (const char* p : kProtected)
            if (c.name == p) prot = true;
        if (prot) continue;
        bool constant = true;
        bool seen = false;
        double first = 0.0;
        for (double v : c.num) {
            if (is_missing(v)) continue;
            if (!seen) {
                first = v;
                seen = true;
            } else if (v != first) {
                constant = false;
                break;
            }
        }
        if (constant) {
            out.remove(c.name);
            removed.push_back(c.name);
        }
    }
    return {std::move(out), std::move(removed)};
}

std::pair<DataTable, RepairReport> repair_values(const DataTable& table,
                                                 const std::string& column,
                                                 const RepairConfig& cfg) {
    DataTable out = table;
    std::vector<double>& vals = out.num(column);
    const std::vector<double>& orig = table.num(column);
    std::size_t n = vals.size();

    std::vector<char> flagged(n, 0);
    std::size_t flag_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_missing(orig[i]) || orig[i] < cfg.valid_lo || orig[i] > cfg.valid_hi) {
            flagged[i] = 1;
            ++flag_count;
        }
    }
    RepairReport report;
    report.detector = "range[" + std::to_string(cfg.valid_lo) + "," +
                      std::to_string(cfg.valid_hi) + "]";
    if (flag_count == 0) {
        report.method = "neighbor_median";
        return {std::move(out), std::move(report)};
    }
    if (flag_count == n) throw IrreparableColumnError("all cells flagged in " + column);

    const std::vector<double>* ts = nullptr;
    if (out.has("timestamp_ms") && !out.col("timestamp_ms").text) ts = &out.num("timestamp_ms");

    auto neighbor_median = [&](std::size_t i) {
        std::vector<double> nb;
        for (std::size_t d = 1; d < n && static_cast<int>(nb.size()) < cfg.neighbor_window; ++d) {
            if (i >= d && !flagged[i - d]) nb.push_back(orig[i - d]);
            if (static_cast<int>(nb.size()) >= cfg.neighbor_window) break;
            if (i + d < n && !flagged[i + d]) nb.push_back(orig[i + d]);
        }
        return median_of(std::move(nb));
    };

    bool used_window = false, used_neighbor = false;
    std::size_t i = 0;
    while (i < n) {
        if (!flagged[i]) {
            ++i;
            continue;
        }
        std::size_t run_start = i;
        while (i < n && flagged[i]) ++i;
        std::size_t run_len = i - run_start;

        if (static_cast<int>(run_len) > cfg.run_threshold && ts != nullptr) {
            // Long run: mean over the non-flagged samples in the window
            // preceding the run.
            double t0 = (*ts)[run_start];
            double sum = 0.0;
            std::size_t cnt = 0;
            for (std::size_t j = run_start; j-- > 0;) {
                if ((*ts)[j] < t0 - cfg.window_ms) break;
                if (!flagged[j]) {
                    sum += orig[j];
                    ++cnt;
                }
            }
            if (cnt > 0) {
                double mean = sum / static_cast<double>(cnt);
                for (std::size_t r = run_start; r < run_start + run_len; ++r) {
                    report.repaired_cells.push_back({r, column, orig[r], mean});
                    vals[r] = mean;
                }
                used_window = true;
                continue;
            }
        }
        for (std::size_t r = run_start; r < run_start + run_len; ++r) {
            double m = neighbor_median(r);
            if (is_missing(m)) continue;
            report.repaired_cells.push_back({r, column, orig[r], m});
            vals[r] = m;
        }
        used_neighbor = true;
    }
    if (used_window && used_neighbor)
        report.method = "neighbor_median+window_mean";
    else if (used_window)
        report.method = "window_mean";
    else
        report.method = "neighbor_median";
    return {std::move(out), std::move(report)};
}

std::pair<DataTable, RepairReport> repair_target_spikes(const DataTable& table,
                                                        const SpikeConfig& cfg) {
    DataTable out = table;
    std::vector<double>& vals = out.num(cfg.target);
    const std::vector<double>& orig = table.num(cfg.target);

    RepairReport report;
    report.method = "target_spike_median";
    report.detector = "rolling_median_delta>=" + std::to_string(cfg.spike_delta);

    const int hw = cfg.half_window;
    for (auto [lo, hi] : ue_segments(table)) {
        std::ptrdiff_t slo = static_cast<std::ptrdiff_t>(lo);
        std::ptrdiff_t shi = static_cast<std::ptrdiff_t>(hi);

        auto side_median = [&](std::ptrdiff_t i, int dir) {
            std::vector<double> v;
            for (int d = 1; d <= hw; ++d) {
                std::ptrdiff_t j = i + dir * d;
                if (j < slo || j >= shi) break;
                v.push_back(orig[j]);
            }
            return median_of(std::move(v));
        };

        std::vector<char> spike(hi - lo, 0);
        for (std::ptrdiff_t i = slo; i < shi; ++i) {
            std::vector<double> win;
            for (std::ptrdiff_t j = std::max(slo, i - hw); j < std::min(shi, i + hw + 1); ++j)
                win.push_back(orig[j]);
            double med = median_of(std::move(win));
            if (std::abs(orig[i] - med) < cfg.spike_delta) continue;
            double before = side_median(i, -1);
            double after = side_median(i, +1);
            // Both neighborhoods must agree; a one-sided window (trace
            // edge) trusts the side it has.
            if (!is_missing(before) && !is_missing(after) && std::abs(before - after) > 1.0)
                continue;
            spike[i - slo] = 1;
        }

        for (std::ptrdiff_t i = slo; i < shi; ++i) {
            if (!spike[i - slo]) continue;
            std::vector<double> nb;
            for (std::ptrdiff_t j = std::max(slo, i - hw); j < std::min(shi, i + hw + 1); ++j) {
                if (j == i || spike[j - slo]) continue;
                nb.push_back(orig[j]);
            }
            if (nb.empty()) continue;
            double m = median_of(std::move(nb));
            double repaired = std::clamp(std::round(m), 1.0, 15.0);
            report.repaired_cells.push_back({static_cast<std::size_t>(i), cfg.target, orig[i],
                                             repaired});
            vals[i] = repaired;
        }
    }
    return {std::move(out), std::move(report)};
}

int NormalizationParams::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

std::pair<DataTable, NormalizationParams> normalize(const DataTable& table,
                                                    const std::vector<std::string>& columns,
                                                    const NormalizationParams* params) {
    DataTable out = table;
    NormalizationParams used;
    for (const std::string& name : columns) {
        std::vector<double>& vals = out.num(name);
        double lo, hi;
        bool degen;
        if (params != nullptr) {
            int pi = params->index_of(name);
            if (pi < 0) throw PreconditionError("no normalization params for " + name);
            lo = params->min[pi];
            hi = params->max[pi];
            degen = params->degenerate[pi];
        } else {
            lo = hi = kMissing;
            for (double v : vals) {
                if (is_missing(v)) continue;
                if (is_missing(lo) || v < lo) lo = v;
                if (is_missing(hi) || v > hi) hi = v;
            }
            if (is_missing(lo)) lo = hi = 0.0;
            degen = (hi <= lo);
        }
        for (double& v : vals) {
            if (is_missing(v)) continue;
            v = degen ? 0.0 : std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
        }
        used.names.push_back(name);
        used.min.push_back(lo);
        used.max.push_back(hi);
        used.degenerate.push_back(degen);
    }
    return {std::move(out), std::move(used)};
}

std::vector<double> denormalize(const NormalizationParams& params, const std::string& column,
                                const std::vector<double>& values) {
    int pi = params.index_of(column);
    if (pi < 0) throw PreconditionError("no normalization params for " + column);
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values)
        out.push_back(params.degenerate[pi] ? params.min[pi]
                                            : params.min[pi] + v * (params.max[pi] - params.min[pi]));
    return out;
}

std::string repair_report_to_json(const RepairReport& report) {
    json j;
    j["method"] = report.method;
    j["detector"] = report.detector;
    j["repaired_cells"] = json::array();
    for (const RepairedCell& c : report.repaired_cells)
        j["repaired_cells"].push_back(
            {{"row", c.row}, {"column", c.column}, {"old", c.old_value}, {"new", c.new_value}});
    return j.dump(2);
}

std::string normalization_to_json(const NormalizationParams& params) {
    json j = json::array();
    for (std::size_t i = 0; i < params.names.size(); ++i)
        j.push_back({{"name", params.names[i]},
                     {"min", params.min[i]},
                     {"max", params.max[i]},
                     {"degenerate", static_cast<bool>(params.degenerate[i])}});
    return j.dump(2);
}

NormalizationParams normalization_from_json(const std::string& json_text) {
    NormalizationParams p;
    for (const json& e : json::parse(json_text)) {
        p.names.push_back(e.at("name").get<std::string>());
        p.min.push_back(e.at("min").get<double>());
        p.max.push_back(e.at("max").get<double>());
        p.degenerate.push_back(e.at("degenerate").get<bool>());
    }
    return p;
}

}  // namespace cnsm::preprocess
