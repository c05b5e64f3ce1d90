// cnsm: workflow driver over the C library API. Exit codes: 0 success,
// 1 error, 2 validation-gate fallback.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cnsm.h"
#include "json.hpp"

using nlohmann::json;

namespace {

int fail(cnsm_status st) {
    std::fprintf(stderr, "error (%d): %s\n", static_cast<int>(st), cnsm_last_error());
    return 1;
}

std::string take(char* s) {
    std::string out = s != nullptr ? s : "";
    cnsm_string_free(s);
    return out;
}

std::string file_digest(const std::string& path) {
    char* hex = nullptr;
    if (cnsm_sha256_file(path.c_str(), &hex) != CNSM_OK) return "";
    return take(hex);
}

// Reproducibility record: one per invocation, digests of every file
// touched.
void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::string>& args, std::uint64_t seed,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    json j;
    j["tool_version"] = cnsm_version();
    j["command"] = command;
    j["args"] = args;
    j["seed"] = seed;
    j["inputs"] = json::object();
    for (const std::string& p : inputs)
        if (!p.empty()) j["inputs"][p] = file_digest(p);
    j["outputs"] = json::object();
    for (const std::string& p : outputs)
        if (!p.empty()) j["outputs"][p] = file_digest(p);
    std::ofstream f(path);
    f << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cognitive network & slice management workflow"};
    app.require_subcommand(1);
    std::vector<std::string> raw_args(argv + 1, argv + argc);

    std::string manifest = "run_manifest.json";
    app.add_option("--manifest", manifest, "run manifest output path")->capture_default_str();

    std::string in, out, truth, config, feature_set, kind, target = "wb_cqi";
    std::string model_paths, model_names, exclusions, profile, env_path, model_path;
    std::string controller = "proactive", kb_root, points, score_input, out_dir;
    std::uint64_t seed = 0;
    double train_fraction = 0.9, threshold = 3.0;
    int k = 3, step = 10;
    std::int64_t ticks = 0, window = 0;
    bool have_profile = false;

    auto* c_gen = app.add_subcommand("generate", "synthesize a monitoring trace");
    c_gen->add_option("--config", config, "generator config JSON file");
    c_gen->add_option("--seed", seed)->required();
    c_gen->add_option("--out", out, "observed CSV")->required();
    c_gen->add_option("--truth", truth, "ground-truth CSV");

    auto* c_ing = app.add_subcommand("ingest", "parse JSON-lines records to CSV");
    c_ing->add_option("--in", in)->required();
    c_ing->add_option("--out", out)->required();

    std::string repair_report;
    auto* c_pre = app.add_subcommand("preprocess", "clean and repair a trace");
    c_pre->add_option("--in", in)->required();
    c_pre->add_option("--out", out)->required();
    c_pre->add_option("--report", repair_report, "sidecar repair report JSON");

    auto* c_fea = app.add_subcommand("features", "select and normalize features");
    c_fea->add_option("--in", in)->required();
    c_fea->add_option("--target", target)->capture_default_str();
    c_fea->add_option("--k", k, "base features to keep")->capture_default_str();
    c_fea->add_option("--exclude", exclusions, "comma-separated exclusions");
    c_fea->add_option("--out", out, "feature-set JSON")->required();

    auto* c_tr = app.add_subcommand("train", "fit one regressor");
    c_tr->add_option("--in", in)->required();
    c_tr->add_option("--features", feature_set)->required();
    c_tr->add_option("--kind", kind, "lasso|elasticnet|forest|gbt")->required();
    c_tr->add_option("--seed", seed)->required();
    c_tr->add_option("--train-fraction", train_fraction)->capture_default_str();
    c_tr->add_option("--out", out, "model JSON")->required();

    auto* c_ev = app.add_subcommand("evaluate", "compare models and run the fallback gates");
    c_ev->add_option("--in", in)->required();
    c_ev->add_option("--features", feature_set)->required();
    c_ev->add_option("--models", model_paths, "comma-separated model files")->required();
    c_ev->add_option("--names", model_names, "comma-separated display names")->required();
    c_ev->add_option("--train-fraction", train_fraction)->capture_default_str();
    c_ev->add_option("--profile", profile, "runtime field names (availability gate)");
    c_ev->add_option("--out", out, "JSON report path");

    auto* c_co = app.add_subcommand("combine", "weight-search over four models");
    c_co->add_option("--in", in)->required();
    c_co->add_option("--features", feature_set)->required();
    c_co->add_option("--models", model_paths, "four comma-separated model files")->required();
    c_co->add_option("--step", step)->capture_default_str();
    c_co->add_option("--train-fraction", train_fraction)->capture_default_str();
    c_co->add_option("--out", out, "model JSON")->required();

    auto* c_an = app.add_subcommand("anomaly", "fit clusters or score a window");
    c_an->add_option("--fit", points, "points JSON file (fit mode)");
    c_an->add_option("--k", k)->capture_default_str();
    c_an->add_option("--seed", seed);
    c_an->add_option("--out", out, "cluster model JSON (fit mode)");
    c_an->add_option("--score", score_input, "score input JSON file");
    c_an->add_option("--threshold", threshold)->capture_default_str();

    auto* c_run = app.add_subcommand("run-pcs", "tick-driven control loop");
    c_run->add_option("--env", env_path, "environment JSON (default bundled)");
    c_run->add_option("--model", model_path)->required();
    c_run->add_option("--features", feature_set)->required();
    c_run->add_option("--controller", controller, "proactive|reactive")->capture_default_str();
    c_run->add_option("--ticks", ticks)->required();
    c_run->add_option("--seed", seed)->required();
    c_run->add_option("--window", window, "anomaly window ticks");
    c_run->add_option("--kb", kb_root, "knowledge base root for feedback");
    c_run->add_option("--out", out_dir, "directory for ledger/event logs");

    auto* c_rep = app.add_subcommand("report", "print stored model metrics");
    c_rep->add_option("--kb", kb_root)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // usage problems are plain errors
    }
    have_profile = c_ev->count("--profile") > 0;

    cnsm_status st = CNSM_OK;
    int exit_code = 0;
    std::string command;
    std::vector<std::string> inputs, outputs;
    char* text = nullptr;

    if (c_gen->parsed()) {
        command = "generate";
        std::string cfg_text;
        if (!config.empty()) {
            std::ifstream f(config);
            cfg_text.assign(std::istreambuf_iterator<char>(f), {});
            inputs.push_back(config);
        }
        st = cnsm_generate(config.empty() ? nullptr : cfg_text.c_str(), seed, out.c_str(),
                           truth.empty() ? nullptr : truth.c_str(), &text);
        outputs = {out, truth};
    } else if (c_ing->parsed()) {
        command = "ingest";
        st = cnsm_ingest_jsonl(in.c_str(), out.c_str(), &text);
        inputs = {in};
        outputs = {out};
    } else if (c_pre->parsed()) {
        command = "preprocess";
        st = cnsm_preprocess(in.c_str(), out.c_str(), &text);
        inputs = {in};
        outputs = {out};
        if (st == CNSM_OK && !repair_report.empty()) {
            std::ofstream f(repair_report);
            f << (text != nullptr ? text : "") << '\n';
            outputs.push_back(repair_report);
        }
    } else if (c_fea->parsed()) {
        command = "features";
        st = cnsm_build_features(in.c_str(), target.c_str(), k,
                                 exclusions.empty() ? nullptr : exclusions.c_str(),
                                 out.c_str(), &text);
        inputs = {in};
        outputs = {out};
    } else if (c_tr->parsed()) {
        command = "train";
        st = cnsm_train(in.c_str(), feature_set.c_str(), kind.c_str(), seed, train_fraction,
                        out.c_str(), &text);
        inputs = {in, feature_set};
        outputs = {out};
    } else if (c_ev->parsed()) {
        command = "evaluate";
        char* report_json = nullptr;
        int gate = 0;
        st = cnsm_evaluate(in.c_str(), feature_set.c_str(), model_paths.c_str(),
                           model_names.c_str(), train_fraction,
                           have_profile ? profile.c_str() : nullptr, &report_json, &text,
                           &gate);
        if (st == CNSM_OK && !out.empty()) {
            std::ofstream f(out);
            f << report_json;
            outputs.push_back(out);
        }
        cnsm_string_free(report_json);
        inputs = {in, feature_set};
        if (st == CNSM_OK && gate != CNSM_GATE_ACCEPT) exit_code = 2;
    } else if (c_co->parsed()) {
        command = "combine";
        st = cnsm_combine(in.c_str(), feature_set.c_str(), model_paths.c_str(), step,
                          train_fraction, out.c_str(), &text);
        inputs = {in, feature_set};
        outputs = {out};
    } else if (c_an->parsed()) {
        command = "anomaly";
        if (!points.empty()) {
            if (c_an->count("--seed") == 0) {
                std::fprintf(stderr, "anomaly --fit requires --seed\n");
                return 1;
            }
            st = cnsm_anomaly_fit(points.c_str(), k, seed,
                                  out.empty() ? nullptr : out.c_str(), &text);
            inputs = {points};
            outputs = {out};
        } else if (!score_input.empty()) {
            st = cnsm_anomaly_score(score_input.c_str(), &text);
            inputs = {score_input};
        } else {
            std::fprintf(stderr, "anomaly needs --fit or --score\n");
            return 1;
        }
    } else if (c_run->parsed()) {
        command = "run-pcs";
        st = cnsm_run_pcs(env_path.empty() ? nullptr : env_path.c_str(), model_path.c_str(),
                          feature_set.c_str(), controller.c_str(), ticks, seed, window,
                          kb_root.empty() ? nullptr : kb_root.c_str(),
                          out_dir.empty() ? nullptr : out_dir.c_str(), &text);
        inputs = {env_path, model_path, feature_set};
        if (!out_dir.empty()) outputs = {out_dir + "/ledger.json", out_dir + "/events.jsonl"};
    } else if (c_rep->parsed()) {
        command = "report";
        st = cnsm_report(kb_root.c_str(), &text);
    }

    if (st != CNSM_OK) return fail(st);
    std::string payload = take(text);
    if (!payload.empty()) std::printf("%s\n", payload.c_str());
    write_manifest(manifest, command, raw_args, seed, inputs, outputs);
    return exit_code;
}
