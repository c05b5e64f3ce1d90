#include "kb.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "json.hpp"

namespace cnsm::kb {

namespace fs = std::filesystem;
using nlohmann::json;

const char* dataset_kind_name(DatasetKind k) {
    switch (k) {
        case DatasetKind::raw: return "raw";
        case DatasetKind::processed: return "processed";
        case DatasetKind::feature_matrix: return "feature_matrix";
    }
    return "raw";
}

DatasetKind dataset_kind_from_name(const std::string& name) {
    if (name == "raw") return DatasetKind::raw;
    if (name == "processed") return DatasetKind::processed;
    if (name == "feature_matrix") return DatasetKind::feature_matrix;
    throw ParseError("unknown dataset kind: " + name);
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string sha256_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return sha256_hex(os.str());
}

// ---- counting filter ----

CountingFilter::CountingFilter(std::size_t m, int hash_count, std::uint64_t seed)
    : counters_(m, 0), k_(hash_count), seed_(seed) {
    if (m == 0 || hash_count < 1) throw PreconditionError("counting filter needs m >= 1, k >= 1");
}

std::size_t CountingFilter::slot(const std::string& item, int i) const {
    // FNV-1a over the bytes, basis perturbed per hash index and seed.
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed_ ^
                      (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i + 1));
    for (unsigned char c : item) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    h ^= h >> 33;
    return static_cast<std::size_t>(h % counters_.size());
}

void CountingFilter::insert(const std::string& item) {
    for (int i = 0; i < k_; ++i) {
        std::uint64_t& c = counters_[slot(item, i)];
        if (c == UINT64_MAX) throw Error("counting filter counter saturated");
        ++c;
    }
}

std::uint64_t CountingFilter::query(const std::string& item) const {
    std::uint64_t best = UINT64_MAX;
    for (int i = 0; i < k_; ++i) best = std::min(best, counters_[slot(item, i)]);
    return best;
}

CountingFilter CountingFilter::merged(const CountingFilter& other) const {
    if (counters_.size() != other.counters_.size() || k_ != other.k_ || seed_ != other.seed_)
        throw IncompatibleFilterError("counting filters have different (m, k, seed)");
    CountingFilter out(counters_.size(), k_, seed_);
    for (std::size_t i = 0; i < counters_.size(); ++i)
        out.counters_[i] = counters_[i] + other.counters_[i];
    return out;
}

// ---- sharing filter ----

ingest::MonitoringRecord apply_sharing_filter(const PolicySet& policy,
                                              const ingest::MonitoringRecord& record) {
    ingest::MonitoringRecord out = record;
    auto redacted = [&](const std::string& field) {
        auto it = policy.sharing_filters.find(field);
        return it != policy.sharing_filters.end() && it->second == ShareRule::redact;
    };
    if (redacted("ue_id")) out.ue_id.clear();
    if (redacted("gnb_id")) out.gnb_id.clear();
    for (auto it = out.metrics.begin(); it != out.metrics.end();) {
        if (redacted(it->first))
            it = out.metrics.erase(it);
        else
            ++it;
    }
    return out;
}

// ---- knowledge base ----

namespace {

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

json policies_to_json(const PolicySet& p) {
    json j;
    j["sharing_filters"] = json::object();
    for (const auto& [field, rule] : p.sharing_filters)
        j["sharing_filters"][field] = (rule == ShareRule::redact ? "redact" : "share");
    j["slice_priorities"] = p.slice_priorities;
    j["handover_restrictions"] = json::array();
    for (const auto& [a, b] : p.handover_restrictions)
        j["handover_restrictions"].push_back({a, b});
    return j;
}

PolicySet policies_from_json(const json& j) {
    PolicySet p;
    if (j.contains("sharing_filters"))
        for (auto it = j["sharing_filters"].begin(); it != j["sharing_filters"].end(); ++it)
            p.sharing_filters[it.key()] =
                it.value().get<std::string>() == "redact" ? ShareRule::redact : ShareRule::share;
    if (j.contains("slice_priorities"))
        p.slice_priorities = j["slice_priorities"].get<std::vector<std::string>>();
    if (j.contains("handover_restrictions"))
        for (const json& pair : j["handover_restrictions"])
            p.handover_restrictions.emplace_back(pair.at(0).get<std::string>(),
                                                 pair.at(1).get<std::string>());
    return p;
}

}  // namespace

KnowledgeBase KnowledgeBase::open(const std::string& root) {
    KnowledgeBase kb;
    kb.root_ = root;
    std::error_code ec;
    fs::create_directories(fs::path(root) / "datasets", ec);
    fs::create_directories(fs::path(root) / "models", ec);
    if (ec) throw IoError("cannot create KB layout under " + root);
    if (fs::exists(fs::path(root) / "kb.json")) {
        kb.load();
    } else {
        kb.save_manifest();
        std::ofstream(fs::path(root) / "feedback.jsonl", std::ios::app);
    }
    return kb;
}

void KnowledgeBase::load() {
    std::ifstream f(fs::path(root_) / "kb.json");
    if (!f) throw IoError("cannot read kb.json under " + root_);
    json j = json::parse(f);
    for (const json& d : j.at("datasets")) {
        DatasetMeta m;
        m.id = d.at("id").get<std::string>();
        m.kind = dataset_kind_from_name(d.at("kind").get<std::string>());
        m.scenario = d.value("scenario", "");
        m.parent_id = d.value("parent_id", "");
        m.row_count = d.at("row_count").get<std::size_t>();
        m.created_at = d.value("created_at", "");
        m.checksum = d.at("checksum").get<std::string>();
        datasets_.push_back(std::move(m));
    }
    for (const json& d : j.at("models")) {
        ModelRecord r;
        r.id = d.at("id").get<std::string>();
        r.model_kind = d.at("model_kind").get<std::string>();
        r.feature_set_id = d.value("feature_set_id", "");
        r.artifact_path = d.at("artifact_path").get<std::string>();
        if (d.contains("metrics") && !d["metrics"].is_null())
            r.metrics = eval::metrics_from_json(d["metrics"].dump());
        models_.push_back(std::move(r));
    }
    policies_ = policies_from_json(j.at("policies"));
    for (const FeedbackEntry& e : feedback()) last_feedback_tick_ = e.tick;
}

void KnowledgeBase::save_manifest() {
    json j;
    j["datasets"] = json::array();
    for (const DatasetMeta& m : datasets_) {
        j["datasets"].push_back({{"id", m.id},
                                 {"kind", dataset_kind_name(m.kind)},
                                 {"scenario", m.scenario},
                                 {"parent_id", m.parent_id},
                                 {"row_count", m.row_count},
                                 {"created_at", m.created_at},
                                 {"checksum", m.checksum}});
    }
    j["models"] = json::array();
    for (const ModelRecord& r : models_) {
        json d = {{"id", r.id},
                  {"model_kind", r.model_kind},
                  {"feature_set_id", r.feature_set_id},
                  {"artifact_path", r.artifact_path}};
        d["metrics"] = r.metrics ? json::parse(eval::metrics_to_json(*r.metrics)) : json();
        j["models"].push_back(std::move(d));
    }
    j["policies"] = policies_to_json(policies_);
    j["feedback_path"] = "feedback.jsonl";
    std::ofstream f(fs::path(root_) / "kb.json");
    if (!f) throw IoError("cannot write kb.json under " + root_);
    f << j.dump(2) << '\n';
}

std::string KnowledgeBase::put_dataset(const DataTable& table, DatasetMeta meta) {
    for (const DatasetMeta& m : datasets_)
        if (m.id == meta.id) throw ConflictError("dataset id already present: " + meta.id);
    if (meta.kind == DatasetKind::processed) {
        bool found = false;
        for (const DatasetMeta& m : datasets_)
            if (m.id == meta.parent_id) found = true;
        if (!found)
            throw PreconditionError("processed dataset names unknown parent: " + meta.parent_id);
    }
    fs::path dir = fs::path(root_) / "datasets" / meta.id;
    fs::create_directories(dir);
    std::string csv = csv_to_string(table);
    {
        std::ofstream f(dir / "data.csv", std::ios::binary);
        if (!f) throw IoError("cannot write dataset " + meta.id);
        f << csv;
    }
    meta.row_count = table.row_count();
    meta.checksum = sha256_hex(csv);
    if (meta.created_at.empty()) meta.created_at = now_iso8601();
    datasets_.push_back(meta);
    save_manifest();
    return meta.id;
}

DataTable KnowledgeBase::get_dataset(const std::string& id) const {
    dataset_meta(id);  // unknown ids fail here, not at the filesystem
    return read_csv((fs::path(root_) / "datasets" / id / "data.csv").string());
}

const DatasetMeta& KnowledgeBase::dataset_meta(const std::string& id) const {
    for (const DatasetMeta& m : datasets_)
        if (m.id == id) return m;
    throw PreconditionError("no such dataset: " + id);
}

std::string KnowledgeBase::put_model(const std::string& artifact_json, ModelRecord record) {
    for (const ModelRecord& r : models_)
        if (r.id == record.id) throw ConflictError("model id already present: " + record.id);
    record.artifact_path = "models/" + record.id + ".json";
    std::ofstream f(fs::path(root_) / record.artifact_path);
    if (!f) throw IoError("cannot write model artifact " + record.id);
    f << artifact_json;
    f.close();
    models_.push_back(record);
    save_manifest();
    return record.id;
}

std::string KnowledgeBase::get_model_artifact(const std::string& id) const {
    const ModelRecord* r = find_model(id);
    if (r == nullptr) throw PreconditionError("no such model: " + id);
    std::ifstream f(fs::path(root_) / r->artifact_path);
    if (!f) throw IoError("missing model artifact: " + r->artifact_path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

const ModelRecord* KnowledgeBase::find_model(const std::string& id) const {
    for (const ModelRecord& r : models_)
        if (r.id == id) return &r;
    return nullptr;
}

void KnowledgeBase::set_model_metrics(const std::string& id, const eval::MetricsReport& metrics) {
    for (ModelRecord& r : models_) {
        if (r.id == id) {
            r.metrics = metrics;
            save_manifest();
            return;
        }
    }
    throw PreconditionError("no such model: " + id);
}

void KnowledgeBase::append_feedback(const FeedbackEntry& entry) {
    if (entry.tick < last_feedback_tick_)
        throw PreconditionError("feedback ticks must be nondecreasing");
    json j = {{"tick", entry.tick},
              {"predicted", entry.predicted},
              {"observed", entry.observed},
              {"action_taken", entry.action_taken}};
    std::ofstream f(fs::path(root_) / "feedback.jsonl", std::ios::app);
    if (!f) throw IoError("cannot append feedback under " + root_);
    f << j.dump() << '\n';
    last_feedback_tick_ = entry.tick;
}

std::vector<FeedbackEntry> KnowledgeBase::feedback() const {
    std::vector<FeedbackEntry> out;
    std::ifstream f(fs::path(root_) / "feedback.jsonl");
    if (!f) return out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        FeedbackEntry e;
        e.tick = j.at("tick").get<std::int64_t>();
        e.predicted = j.at("predicted").get<double>();
        e.observed = j.at("observed").get<double>();
        e.action_taken = j.value("action_taken", "");
        out.push_back(e);
    }
    return out;
}

void KnowledgeBase::save_policies() { save_manifest(); }

}  // namespace cnsm::kb
