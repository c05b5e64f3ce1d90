#include "ingest.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "error.hpp"
#include "json.hpp"

namespace cnsm::ingest {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// 3GPP-style CQI spectral efficiency lookup, bits/s/Hz.
constexpr double kEfficiency[15] = {0.1523, 0.2344, 0.3770, 0.6016, 0.8770,
                                    1.1758, 1.4766, 1.9141, 2.4063, 2.7305,
                                    3.3223, 3.9023, 4.5234, 5.1152, 5.5547};

}  // namespace

const char* mobility_name(Mobility m) {
    switch (m) {
        case Mobility::static_ue: return "static";
        case Mobility::pedestrian: return "pedestrian";
        case Mobility::circular_drive: return "circular_drive";
        case Mobility::drive_away: return "drive_away";
        case Mobility::random_waypoint: return "random_waypoint";
    }
    return "static";
}

Mobility mobility_from_name(const std::string& name) {
    if (name == "static") return Mobility::static_ue;
    if (name == "pedestrian") return Mobility::pedestrian;
    if (name == "circular_drive") return Mobility::circular_drive;
    if (name == "drive_away") return Mobility::drive_away;
    if (name == "random_waypoint") return Mobility::random_waypoint;
    throw ParseError("unknown mobility scenario: " + name);
}

double ChannelModel::path_loss(double distance_m) const {
    double d = std::max(distance_m, 1.0);
    return ref_loss_db + 10.0 * exponent * std::log10(d);
}

double ChannelModel::rsrp(double distance_m) const {
    return std::min(tx_power_dbm - path_loss(distance_m), 0.0);
}

double ChannelModel::sinr(double distance_m) const {
    return tx_power_dbm - path_loss(distance_m) - noise_floor_dbm;
}

int ChannelModel::cqi_from_sinr(double sinr_db) const {
    double step = (sinr_hi_db - sinr_lo_db) / 15.0;
    int bin = 1 + static_cast<int>(std::floor((sinr_db - sinr_lo_db) / step));
    return std::clamp(bin, 1, 15);
}

double ChannelModel::efficiency(int cqi) const {
    return kEfficiency[std::clamp(cqi, 1, 15) - 1];
}

int mcs_from_cqi(int cqi) {
    return std::clamp(static_cast<int>(std::lround(1.85 * cqi)), 0, 28);
}

GeneratorConfig default_generator_config() {
    GeneratorConfig cfg;
    cfg.scenarios = {
        {Mobility::static_ue, 60000, 10, 0.0, 0.0, 0.0},
        {Mobility::pedestrian, 60000, 10, 0.0, 0.0, 1.5},
        {Mobility::circular_drive, 60000, 10, 0.0, 0.0, 15.0},
        {Mobility::drive_away, 60000, 10, 0.0, 0.0, 8.0},
        {Mobility::random_waypoint, 60000, 10, 0.0, 0.0, 10.0},
    };
    cfg.corruption = {3, 0.02, 3};
    return cfg;
}

GeneratorConfig generator_config_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    GeneratorConfig cfg = default_generator_config();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("noise_sigma_db")) cfg.noise_sigma_db = j.at("noise_sigma_db").get<double>();
    if (cfg.noise_sigma_db < 0) throw ParseError("noise_sigma_db must be >= 0");
    if (j.contains("static_field_count"))
        cfg.static_field_count = j.at("static_field_count").get<int>();
    if (cfg.static_field_count < 0) throw ParseError("static_field_count must be >= 0");
    if (j.contains("corruption")) {
        const json& c = j.at("corruption");
        if (c.contains("spike_value")) cfg.corruption.spike_value = c.at("spike_value").get<int>();
        if (c.contains("spike_probability"))
            cfg.corruption.spike_probability = c.at("spike_probability").get<double>();
        if (c.contains("max_run_length"))
            cfg.corruption.max_run_length = c.at("max_run_length").get<int>();
    }
    if (cfg.corruption.spike_probability < 0 || cfg.corruption.spike_probability > 1)
        throw ParseError("spike_probability must be in [0,1]");
    if (cfg.corruption.max_run_length < 1) throw ParseError("max_run_length must be >= 1");
    if (j.contains("channel")) {
        const json& c = j.at("channel");
        if (c.contains("tx_power_dbm")) cfg.channel.tx_power_dbm = c.at("tx_power_dbm").get<double>();
        if (c.contains("ref_loss_db")) cfg.channel.ref_loss_db = c.at("ref_loss_db").get<double>();
        if (c.contains("exponent")) cfg.channel.exponent = c.at("exponent").get<double>();
        if (c.contains("noise_floor_dbm"))
            cfg.channel.noise_floor_dbm = c.at("noise_floor_dbm").get<double>();
    }
    if (j.contains("scenarios")) {
        cfg.scenarios.clear();
        for (const json& s : j.at("scenarios")) {
            TraceScenario ts;
            ts.mobility = mobility_from_name(s.at("name").get<std::string>());
            if (s.contains("duration_ms")) ts.duration_ms = s.at("duration_ms").get<std::int64_t>();
            if (s.contains("sample_period_ms"))
                ts.sample_period_ms = s.at("sample_period_ms").get<std::int64_t>();
            if (s.contains("gnb_x")) ts.gnb_x = s.at("gnb_x").get<double>();
            if (s.contains("gnb_y")) ts.gnb_y = s.at("gnb_y").get<double>();
            if (s.contains("speed_mps")) ts.speed_mps = s.at("speed_mps").get<double>();
            if (ts.duration_ms <= 0) throw ParseError("scenario duration must be > 0");
            if (ts.sample_period_ms <= 0) throw ParseError("scenario sample period must be > 0");
            cfg.scenarios.push_back(ts);
        }
    }
    return cfg;
}

std::string generator_config_to_json(const GeneratorConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["noise_sigma_db"] = cfg.noise_sigma_db;
    j["static_field_count"] = cfg.static_field_count;
    j["corruption"] = {{"spike_value", cfg.corruption.spike_value},
                       {"spike_probability", cfg.corruption.spike_probability},
                       {"max_run_length", cfg.corruption.max_run_length}};
    j["channel"] = {{"tx_power_dbm", cfg.channel.tx_power_dbm},
                    {"ref_loss_db", cfg.channel.ref_loss_db},
                    {"exponent", cfg.channel.exponent},
                    {"noise_floor_dbm", cfg.channel.noise_floor_dbm}};
    j["scenarios"] = json::array();
    for (const TraceScenario& s : cfg.scenarios) {
        j["scenarios"].push_back({{"name", mobility_name(s.mobility)},
                                  {"duration_ms", s.duration_ms},
                                  {"sample_period_ms", s.sample_period_ms},
                                  {"gnb_x", s.gnb_x},
                                  {"gnb_y", s.gnb_y},
                                  {"speed_mps", s.speed_mps}});
    }
    return j.dump(2);
}

namespace {

// UE position offset from the gNB per mobility pattern.
struct MotionState {
    double x = 0.0, y = 0.0;
    double tx = 0.0, ty = 0.0;  // random-waypoint target
    double dir = 1.0;           // pedestrian bounce direction
    double angle = 0.0;         // circular drive
};

MotionState motion_init(Mobility m) {
    MotionState st;
    switch (m) {
        case Mobility::static_ue: st.x = 200.0; break;
        case Mobility::pedestrian: st.x = 100.0; break;
        case Mobility::circular_drive: st.x = 300.0; break;
        case Mobility::drive_away: st.x = 10.0; break;
        case Mobility::random_waypoint: st.x = 100.0; st.y = 100.0; break;
    }
    return st;
}

void motion_step(Mobility m, MotionState& st, double speed, double dt, std::mt19937_64& rng) {
    switch (m) {
        case Mobility::static_ue:
            break;
        case Mobility::pedestrian: {
            st.x += st.dir * speed * dt;
            if (st.x > 400.0) { st.x = 400.0; st.dir = -1.0; }
            if (st.x < 50.0) { st.x = 50.0; st.dir = 1.0; }
            break;
        }
        case Mobility::circular_drive: {
            st.angle += speed / 300.0 * dt;
            st.x = 300.0 * std::cos(st.angle);
            st.y = 300.0 * std::sin(st.angle);
            break;
        }
        case Mobility::drive_away:
            st.x += speed * dt;
            break;
        case Mobility::random_waypoint: {
            double dx = st.tx - st.x, dy = st.ty - st.y;
            double dist = std::hypot(dx, dy);
            if (dist < speed * dt) {
                std::uniform_real_distribution<double> u(-500.0, 500.0);
                st.tx = u(rng);
                st.ty = u(rng);
            } else {
                st.x += dx / dist * speed * dt;
                st.y += dy / dist * speed * dt;
            }
            break;
        }
    }
}

}  // namespace

GeneratedTrace generate_trace(const GeneratorConfig& cfg) {
    std::vector<double> ts_col, cqi_col, mcs_col, rsrp_col, rsrq_col, phr_col;
    std::vector<std::string> ue_col, gnb_col, scen_col;

    const ChannelModel& ch = cfg.channel;
    double sinr_span = ch.sinr_hi_db - ch.sinr_lo_db;

    for (std::size_t si = 0; si < cfg.scenarios.size(); ++si) {
        const TraceScenario& sc = cfg.scenarios[si];
        std::mt19937_64 rng(splitmix64(cfg.seed + si));
        std::normal_distribution<double> gauss(0.0, 1.0);

        std::string scen_name = mobility_name(sc.mobility);
        std::string ue_id = "ue" + std::to_string(si) + "_" + scen_name;
        MotionState st = motion_init(sc.mobility);
        double dt = static_cast<double>(sc.sample_period_ms) / 1000.0;
        std::int64_t rows = sc.duration_ms / sc.sample_period_ms;

        for (std::int64_t t = 0; t < rows; ++t) {
            double dist = std::hypot(st.x, st.y);
            double sinr_det = ch.sinr(dist);
            double sigma = cfg.noise_sigma_db;
            double sinr_obs = sinr_det + (sigma > 0 ? sigma * gauss(rng) : 0.0);
            double rsrp_v = std::min(ch.rsrp(dist) + (sigma > 0 ? sigma * gauss(rng) : 0.0), 0.0);
            double sinr_frac = std::clamp((sinr_det - ch.sinr_lo_db) / sinr_span, 0.0, 1.0);
            double rsrq_v =
                std::min(-19.5 + 16.5 * sinr_frac + (sigma > 0 ? 0.5 * sigma * gauss(rng) : 0.0),
                         -0.1);
            double phr_v = 40.0 - 0.25 * ch.path_loss(dist) +
                           (sigma > 0 ? sigma * gauss(rng) : 0.0);
            int cqi = ch.cqi_from_sinr(sinr_obs);

            ts_col.push_back(static_cast<double>(t * sc.sample_period_ms));
            ue_col.push_back(ue_id);
            gnb_col.push_back("gnb0");
            scen_col.push_back(scen_name);
            rsrp_col.push_back(rsrp_v);
            rsrq_col.push_back(rsrq_v);
            phr_col.push_back(phr_v);
            cqi_col.push_back(static_cast<double>(cqi));
            mcs_col.push_back(static_cast<double>(mcs_from_cqi(cqi)));

            motion_step(sc.mobility, st, sc.speed_mps, dt, rng);
        }
    }

    DataTable truth;
    truth.add_numeric("timestamp_ms", ts_col);
    truth.add_text("ue_id", ue_col);
    truth.add_text("gnb_id", gnb_col);
    truth.add_text("scenario", scen_col);
    truth.add_numeric("mcs1_dl", mcs_col);
    truth.add_numeric("phr", phr_col);
    truth.add_numeric("rsrp", rsrp_col);
    truth.add_numeric("rsrq", rsrq_col);
    for (int i = 0; i < cfg.static_field_count; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "static_%02d", i);
        truth.add_numeric(name, std::vector<double>(ts_col.size(), 1000.0 + 7.0 * i));
    }
    truth.add_numeric("wb_cqi", cqi_col);

    GeneratedTrace out;
    auto [observed, corrupted] =
        inject_corruption(truth, cfg.corruption, splitmix64(cfg.seed ^ 0xc0ffee));
    out.observed = std::move(observed);
    out.ground_truth = std::move(truth);
    out.corrupted_rows = std::move(corrupted);
    return out;
}

std::pair<DataTable, std::vector<std::size_t>> inject_corruption(const DataTable& table,
                                                                 const CorruptionSpec& spec,
                                                                 std::uint64_t seed) {
    if (!table.has("wb_cqi")) throw PreconditionError("table has no wb_cqi column");
    DataTable out = table;
    std::vector<std::size_t> hit;
    std::vector<double>& cqi = out.num("wb_cqi");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    std::size_t i = 0;
    while (i < cqi.size()) {
        if (u(rng) < spec.spike_probability) {
            int len = 1;
            if (spec.max_run_length > 1) {
                std::uniform_int_distribution<int> runlen(1, spec.max_run_length);
                len = runlen(rng);
            }
            for (int k = 0; k < len && i < cqi.size(); ++k, ++i) {
                cqi[i] = static_cast<double>(spec.spike_value);
                hit.push_back(i);
            }
        } else {
            ++i;
        }
    }
    return {std::move(out), std::move(hit)};
}

DataTable parse_records(const std::string& jsonl_text) {
    struct Row {
        double ts;
        std::string ue, gnb, scenario;
        std::map<std::string, double> metrics;
    };
    std::vector<Row> rows;
    std::set<std::string> metric_names;
    bool any_scenario = false;

    std::istringstream is(jsonl_text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object())
            throw ParseError("line " + std::to_string(lineno) + ": not a JSON object");
        Row row;
        try {
            row.ts = j.at("timestamp_ms").get<double>();
            row.ue = j.at("ue_id").get<std::string>();
            row.gnb = j.at("gnb_id").get<std::string>();
        } catch (const json::exception& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& key = it.key();
            if (key == "timestamp_ms" || key == "ue_id" || key == "gnb_id") continue;
            if (key == "scenario" && it.value().is_string()) {
                row.scenario = it.value().get<std::string>();
                any_scenario = true;
                continue;
            }
            if (!it.value().is_number())
                throw ParseError("line " + std::to_string(lineno) + ": non-numeric value for '" +
                                 key + "'");
            row.metrics[key] = it.value().get<double>();
            metric_names.insert(key);
        }
        rows.push_back(std::move(row));
    }

    DataTable table;
    {
        std::vector<double> ts;
        std::vector<std::string> ue, gnb;
        for (const Row& r : rows) {
            ts.push_back(r.ts);
            ue.push_back(r.ue);
            gnb.push_back(r.gnb);
        }
        table.add_numeric("timestamp_ms", std::move(ts));
        table.add_text("ue_id", std::move(ue));
        table.add_text("gnb_id", std::move(gnb));
    }
    if (any_scenario) {
        std::vector<std::string> scen;
        scen.reserve(rows.size());
        for (const Row& r : rows) scen.push_back(r.scenario);
        table.add_text("scenario", std::move(scen));
    }
    for (const std::string& name : metric_names) {
        std::vector<double> col;
        col.reserve(rows.size());
        for (const Row& r : rows) {
            auto it = r.metrics.find(name);
            col.push_back(it == r.metrics.end() ? kMissing : it->second);
        }
        table.add_numeric(name, std::move(col));
    }
    return table;
}

std::string serialize_records(const DataTable& table) {
    std::ostringstream os;
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        json j;
        for (const Column& c : table.columns()) {
            if (c.text) {
                j[c.name] = c.str[r];
            } else if (!is_missing(c.num[r])) {
                if (c.name == "timestamp_ms")
                    j[c.name] = static_cast<std::int64_t>(c.num[r]);
                else
                    j[c.name] = c.num[r];
            }
        }
        os << j.dump() << '\n';
    }
    return os.str();
}

std::vector<MonitoringRecord> records_from_table(const DataTable& table) {
    std::vector<MonitoringRecord> out;
    out.reserve(table.row_count());
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        MonitoringRecord rec;
        for (const Column& c : table.columns()) {
            if (c.name == "timestamp_ms" && !c.text)
                rec.timestamp_ms = static_cast<std::int64_t>(c.num[r]);
            else if (c.name == "ue_id" && c.text)
                rec.ue_id = c.str[r];
            else if (c.name == "gnb_id" && c.text)
                rec.gnb_id = c.str[r];
            else if (!c.text && !is_missing(c.num[r]))
                rec.metrics[c.name] = c.num[r];
        }
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace cnsm::ingest
