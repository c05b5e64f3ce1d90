#include "cnsm.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "anomaly.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "features.hpp"
#include "ingest.hpp"
#include "json.hpp"
#include "kb.hpp"
#include "models.hpp"
#include "pcs.hpp"
#include "preprocess.hpp"
#include "table.hpp"

using nlohmann::json;
using namespace cnsm;

namespace {

thread_local std::string g_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void set_out(char** slot, const std::string& value) {
    if (slot != nullptr) *slot = dup_string(value);
}

template <typename Fn>
cnsm_status guarded(Fn&& fn) {
    try {
        fn();
        return CNSM_OK;
    } catch (const IoError& e) {
        g_error = e.what();
        return CNSM_ERR_IO;
    } catch (const ParseError& e) {
        g_error = e.what();
        return CNSM_ERR_PARSE;
    } catch (const ConflictError& e) {
        g_error = e.what();
        return CNSM_ERR_CONFLICT;
    } catch (const models::ConvergenceError& e) {
        g_error = e.what();
        return CNSM_ERR_CONVERGENCE;
    } catch (const PreconditionError& e) {
        g_error = e.what();
        return CNSM_ERR_PRECONDITION;
    } catch (const DomainError& e) {
        g_error = e.what();
        return CNSM_ERR_DOMAIN;
    } catch (const std::exception& e) {
        g_error = e.what();
        return CNSM_ERR_INTERNAL;
    }
}

std::vector<std::string> split_csv_list(const char* text) {
    std::vector<std::string> out;
    if (text == nullptr) return out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    f << text;
}

// Normalized table + expanded train/validation matrices for one CSV.
std::pair<features::FeatureMatrix, features::FeatureMatrix> load_matrices(
    const std::string& csv_path, const features::FeatureSet& fs, double train_fraction) {
    DataTable table = read_csv(csv_path);
    auto [normalized, params] =
        preprocess::normalize(table, fs.base_features, &fs.normalization);
    eval::SplitSpec spec;
    spec.train_fraction = train_fraction;
    auto [train, val] = eval::scenario_split(normalized, spec);
    return {features::expand_polynomial(train, fs),
            features::expand_polynomial(val, fs)};
}

std::shared_ptr<models::Model> train_kind(const std::string& kind,
                                          const features::FeatureMatrix& train,
                                          const features::FeatureMatrix& val,
                                          const models::TrainConfig& cfg) {
    if (kind == "lasso")
        return std::make_shared<models::LinearModel>(models::train_lasso(train, val, cfg));
    if (kind == "elasticnet")
        return std::make_shared<models::LinearModel>(models::train_elasticnet(train, val, cfg));
    if (kind == "forest")
        return std::make_shared<models::ForestModel>(models::train_random_forest(train, cfg));
    if (kind == "gbt")
        return std::make_shared<models::GbtModel>(models::train_gbt(train, cfg));
    throw PreconditionError("unknown model kind: " + kind);
}

}  // namespace

extern "C" {

const char* cnsm_version(void) { return "0.1.0"; }

const char* cnsm_last_error(void) { return g_error.c_str(); }

void cnsm_string_free(char* s) { std::free(s); }

/* ---- opaque handles ---- */

struct cnsm_table {
    DataTable table;
};
struct cnsm_model {
    std::shared_ptr<models::Model> model;
};
struct cnsm_kb {
    kb::KnowledgeBase kb;
};

cnsm_status cnsm_table_read_csv(const char* path, cnsm_table** out) {
    return guarded([&] { *out = new cnsm_table{read_csv(path)}; });
}

cnsm_status cnsm_table_write_csv(const cnsm_table* table, const char* path) {
    return guarded([&] { write_csv(table->table, path); });
}

size_t cnsm_table_rows(const cnsm_table* table) { return table->table.row_count(); }

size_t cnsm_table_cols(const cnsm_table* table) { return table->table.columns().size(); }

void cnsm_table_free(cnsm_table* table) { delete table; }

cnsm_status cnsm_model_load(const char* path, cnsm_model** out) {
    return guarded([&] { *out = new cnsm_model{models::model_from_json(slurp(path))}; });
}

cnsm_status cnsm_model_predict(const cnsm_model* model, const double* row, size_t n,
                               double* out) {
    return guarded([&] {
        std::vector<double> x(row, row + n);
        *out = model->model->predict_row(x);
    });
}

cnsm_status cnsm_model_kind(const cnsm_model* model, char** out) {
    return guarded([&] { set_out(out, models::model_kind_name(model->model->kind())); });
}

void cnsm_model_free(cnsm_model* model) { delete model; }

cnsm_status cnsm_kb_open(const char* root, cnsm_kb** out) {
    return guarded([&] { *out = new cnsm_kb{kb::KnowledgeBase::open(root)}; });
}

cnsm_status cnsm_kb_put_dataset_csv(cnsm_kb* handle, const char* csv_path, const char* id,
                                    const char* kind, const char* scenario,
                                    const char* parent_id) {
    return guarded([&] {
        kb::DatasetMeta meta;
        meta.id = id;
        meta.kind = kb::dataset_kind_from_name(kind);
        if (scenario != nullptr) meta.scenario = scenario;
        if (parent_id != nullptr) meta.parent_id = parent_id;
        handle->kb.put_dataset(read_csv(csv_path), meta);
    });
}

size_t cnsm_kb_dataset_count(const cnsm_kb* handle) { return handle->kb.datasets().size(); }

void cnsm_kb_free(cnsm_kb* handle) { delete handle; }

cnsm_status cnsm_sha256_file(const char* path, char** hex_out) {
    return guarded([&] { set_out(hex_out, kb::sha256_file(path)); });
}

/* ---- pipeline ---- */

cnsm_status cnsm_generate(const char* config_json, uint64_t seed, const char* observed_csv,
                          const char* truth_csv, char** summary_json) {
    return guarded([&] {
        ingest::GeneratorConfig cfg = config_json != nullptr
                                          ? ingest::generator_config_from_json(config_json)
                                          : ingest::default_generator_config();
        cfg.seed = seed;
        ingest::GeneratedTrace trace = ingest::generate_trace(cfg);
        if (observed_csv != nullptr) write_csv(trace.observed, observed_csv);
        if (truth_csv != nullptr) write_csv(trace.ground_truth, truth_csv);
        json j = {{"rows", trace.observed.row_count()},
                  {"corrupted_rows", trace.corrupted_rows.size()},
                  {"seed", seed}};
        set_out(summary_json, j.dump());
    });
}

cnsm_status cnsm_ingest_jsonl(const char* jsonl_path, const char* out_csv,
                              char** summary_json) {
    return guarded([&] {
        DataTable table = ingest::parse_records(slurp(jsonl_path));
        if (out_csv != nullptr) write_csv(table, out_csv);
        json j = {{"rows", table.row_count()}, {"columns", table.columns().size()}};
        set_out(summary_json, j.dump());
    });
}

cnsm_status cnsm_preprocess(const char* in_csv, const char* out_csv, char** report_json) {
    return guarded([&] {
        DataTable table = read_csv(in_csv);
        table = preprocess::add_relative_timestamps(table);
        auto [pruned, removed] = preprocess::prune_static_fields(table);
        preprocess::RepairConfig rc;
        rc.valid_lo = 1.0;
        rc.valid_hi = 15.0;
        auto [ranged, range_report] = preprocess::repair_values(pruned, "wb_cqi", rc);
        auto [repaired, spike_report] = preprocess::repair_target_spikes(ranged);
        if (out_csv != nullptr) write_csv(repaired, out_csv);
        json j = {{"removed_static_fields", removed},
                  {"range_repairs", range_report.repaired_cells.size()},
                  {"spike_repairs", spike_report.repaired_cells.size()}};
        set_out(report_json, j.dump());
    });
}

cnsm_status cnsm_build_features(const char* in_csv, const char* target, int k,
                                const char* exclusions, const char* feature_set_out,
                                char** summary_json) {
    return guarded([&] {
        DataTable table = read_csv(in_csv);
        features::CorrelationMatrix corr = features::correlation_matrix(table);
        features::FeatureSet fs =
            features::select_features(corr, target, k, split_csv_list(exclusions));
        auto [normalized, params] = preprocess::normalize(table, fs.base_features);
        fs.normalization = params;
        if (feature_set_out != nullptr) spit(feature_set_out, features::feature_set_to_json(fs));
        json j = {{"base_features", fs.base_features},
                  {"expanded_columns", fs.base_features.size() * 5}};
        set_out(summary_json, j.dump());
    });
}

cnsm_status cnsm_train(const char* in_csv, const char* feature_set_path, const char* kind,
                       uint64_t seed, double train_fraction, const char* model_out,
                       char** metrics_json) {
    return guarded([&] {
        features::FeatureSet fs = features::feature_set_from_json(slurp(feature_set_path));
        auto [train, val] = load_matrices(in_csv, fs, train_fraction);
        models::TrainConfig cfg;
        cfg.seed = seed;
        std::shared_ptr<models::Model> model = train_kind(kind, train, val, cfg);
        if (model_out != nullptr) spit(model_out, model->to_json());
        eval::MetricsReport m = eval::metrics(val.y, model->predict(val.x));
        set_out(metrics_json, eval::metrics_to_json(m));
    });
}

cnsm_status cnsm_evaluate(const char* in_csv, const char* feature_set_path,
                          const char* model_paths, const char* model_names,
                          double train_fraction, const char* profile, char** report_json,
                          char** report_text, int* gate_out) {
    return guarded([&] {
        features::FeatureSet fs = features::feature_set_from_json(slurp(feature_set_path));
        auto [train, val] = load_matrices(in_csv, fs, train_fraction);
        std::vector<std::string> paths = split_csv_list(model_paths);
        std::vector<std::string> names = split_csv_list(model_names);
        if (names.size() != paths.size())
            throw PreconditionError("model name/path count mismatch");
        std::vector<std::pair<std::string, std::shared_ptr<models::Model>>> candidates;
        for (std::size_t i = 0; i < paths.size(); ++i)
            candidates.emplace_back(names[i], models::model_from_json(slurp(paths[i])));
        std::vector<std::string> available = split_csv_list(profile);
        eval::ComparisonReport report = eval::compare_models(
            candidates, val, fs, profile != nullptr ? &available : nullptr);
        set_out(report_json, eval::comparison_to_json(report));
        set_out(report_text, eval::comparison_to_text(report));
        if (gate_out != nullptr) *gate_out = static_cast<int>(report.verdict);
    });
}

cnsm_status cnsm_combine(const char* in_csv, const char* feature_set_path,
                         const char* model_paths, int step, double train_fraction,
                         const char* model_out, char** summary_json) {
    return guarded([&] {
        features::FeatureSet fs = features::feature_set_from_json(slurp(feature_set_path));
        auto [train, val] = load_matrices(in_csv, fs, train_fraction);
        std::vector<std::string> paths = split_csv_list(model_paths);
        if (paths.size() != 4) throw PreconditionError("combine expects 4 component models");
        auto combined = std::make_shared<models::CombinedModel>();
        std::array<std::vector<double>, 4> preds;
        for (std::size_t i = 0; i < 4; ++i) {
            combined->components.push_back(models::model_from_json(slurp(paths[i])));
            preds[i] = combined->components[i]->predict(val.x);
        }
        combined->weights_percent = models::search_combined_weights(preds, val.y, step);
        if (model_out != nullptr) spit(model_out, combined->to_json());
        eval::MetricsReport m = eval::metrics(val.y, combined->predict(val.x));
        json j = {{"weights_percent", combined->weights_percent},
                  {"metrics", json::parse(eval::metrics_to_json(m))}};
        set_out(summary_json, j.dump());
    });
}

cnsm_status cnsm_anomaly_fit(const char* points_json_path, int k, uint64_t seed,
                             const char* model_out, char** summary_json) {
    return guarded([&] {
        json in = json::parse(slurp(points_json_path));
        auto points = in.get<std::vector<std::vector<double>>>();
        anomaly::ClusterModel cm = anomaly::kmeans_fit(points, k, seed);
        if (model_out != nullptr) spit(model_out, anomaly::cluster_model_to_json(cm));
        json j = {{"k", cm.k},
                  {"inertia", cm.inertia},
                  {"outlier_distance", cm.outlier_distance}};
        set_out(summary_json, j.dump());
    });
}

cnsm_status cnsm_anomaly_score(const char* input_json_path, char** score_json) {
    return guarded([&] {
        json in = json::parse(slurp(input_json_path));
        auto residuals = in.at("history").get<std::vector<double>>();
        std::vector<anomaly::Window> history;
        for (std::size_t i = 0; i < residuals.size(); ++i) {
            anomaly::Window w;
            w.start_tick = static_cast<std::int64_t>(i);
            w.end_tick = w.start_tick + 1;
            w.summary.assign(anomaly::kSummaryDim, 0.0);
            w.summary[anomaly::kResidualRmseIndex] = residuals[i];
            history.push_back(w);
        }
        anomaly::Window current;
        current.start_tick = static_cast<std::int64_t>(residuals.size());
        current.end_tick = current.start_tick + 1;
        current.summary.assign(anomaly::kSummaryDim, 0.0);
        current.summary[anomaly::kResidualRmseIndex] = in.at("current").get<double>();
        anomaly::ScoreConfig cfg;
        if (in.contains("threshold")) cfg.threshold = in["threshold"].get<double>();
        auto score = anomaly::score_window(history, current, cfg);
        json j;
        if (score) {
            j["ready"] = true;
            j["score"] = score->value;
            j["threshold"] = score->threshold;
            j["anomalous"] = anomaly::detect(*score);
        } else {
            j["ready"] = false;
        }
        set_out(score_json, j.dump());
    });
}

cnsm_status cnsm_run_pcs(const char* env_json_path, const char* model_path,
                         const char* feature_set_path, const char* controller,
                         int64_t ticks, uint64_t seed, int64_t window_ticks,
                         const char* kb_root, const char* out_dir, char** report_json) {
    return guarded([&] {
        pcs::EnvConfig env = env_json_path != nullptr
                                 ? pcs::env_config_from_json(slurp(env_json_path))
                                 : pcs::default_env_config();
        std::shared_ptr<models::Model> model = models::model_from_json(slurp(model_path));
        features::FeatureSet fs = features::feature_set_from_json(slurp(feature_set_path));
        pcs::LoopConfig loop;
        std::string ctl = controller != nullptr ? controller : "proactive";
        if (ctl == "proactive")
            loop.controller = pcs::ControllerKind::proactive;
        else if (ctl == "reactive")
            loop.controller = pcs::ControllerKind::reactive;
        else
            throw PreconditionError("unknown controller: " + ctl);
        if (window_ticks > 0) loop.window_ticks = window_ticks;

        std::optional<kb::KnowledgeBase> store;
        if (kb_root != nullptr) store = kb::KnowledgeBase::open(kb_root);
        pcs::RunResult result = pcs::run_loop(env, loop, model, fs, nullptr,
                                              store ? &*store : nullptr, ticks, seed);
        if (out_dir != nullptr) {
            std::filesystem::create_directories(out_dir);
            spit(std::string(out_dir) + "/ledger.json", pcs::ledger_to_json(result.ledger));
            spit(std::string(out_dir) + "/events.jsonl", pcs::events_to_jsonl(result.events));
        }
        auto audit = pcs::sla_audit(result.ledger, env.slices);
        json j;
        j["ledger"] = json::parse(pcs::ledger_to_json(result.ledger));
        j["detection_ticks"] = result.detection_ticks;
        j["prb_conservation_held"] = result.prb_conservation_held;
        j["priority_monotonicity_held"] = result.priority_monotonicity_held;
        j["audit"] = json::object();
        for (const auto& [id, v] : audit)
            j["audit"][id] = {{"met", v.met},
                              {"good_fraction", v.good_fraction},
                              {"penalty", v.penalty}};
        set_out(report_json, j.dump(2));
    });
}

cnsm_status cnsm_report(const char* kb_root, char** text_out) {
    return guarded([&] {
        kb::KnowledgeBase store = kb::KnowledgeBase::open(kb_root);
        std::ostringstream os;
        char line[128];
        std::snprintf(line, sizeof(line), "%-16s %-12s %10s %10s %10s %12s\n", "Model", "Kind",
                      "RMSE", "RMSE/15", "MAPE (%)", "Accuracy (%)");
        os << line;
        for (const kb::ModelRecord& r : store.models()) {
            if (!r.metrics) continue;
            std::snprintf(line, sizeof(line), "%-16s %-12s %10.4f %10.4f %10.2f %12.2f\n",
                          r.id.c_str(), r.model_kind.c_str(), r.metrics->rmse_raw,
                          r.metrics->rmse_normalized, r.metrics->mape_percent,
                          r.metrics->accuracy_percent);
            os << line;
        }
        set_out(text_out, os.str());
    });
}

}  // extern "C"
