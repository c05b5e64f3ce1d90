#ifndef CNSM_KB_HPP
#define CNSM_KB_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eval.hpp"
#include "ingest.hpp"
#include "table.hpp"

namespace cnsm::kb {

enum class DatasetKind { raw, processed, feature_matrix };
const char* dataset_kind_name(DatasetKind k);
DatasetKind dataset_kind_from_name(const std::string& name);

struct DatasetMeta {
    std::string id;
    DatasetKind kind = DatasetKind::raw;
    std::string scenario;
    std::string parent_id;  // required for processed datasets
    std::size_t row_count = 0;
    std::string created_at;  // ISO 8601
    std::string checksum;    // SHA-256 hex of the stored file
};

struct ModelRecord {
    std::string id;
    std::string model_kind;
    std::string feature_set_id;
    std::optional<eval::MetricsReport> metrics;  // present iff validated
    std::string artifact_path;                   // relative to KB root
};

enum class ShareRule { share, redact };

struct PolicySet {
    std::map<std::string, ShareRule> sharing_filters;
    std::vector<std::string> slice_priorities;  // each slice once
    std::vector<std::pair<std::string, std::string>> handover_restrictions;
};

struct FeedbackEntry {
    std::int64_t tick = 0;
    double predicted = 0.0;
    double observed = 0.0;
    std::string action_taken;  // optional ActionEvent id
};

// Counting Bloom filter: k seeded 64-bit hashes reduced mod m, query
// returns the minimum counter. Mergeable iff (m, k, seed) match.
class CountingFilter {
public:
    CountingFilter(std::size_t m = 4096, int hash_count = 3, std::uint64_t seed = 0);

    void insert(const std::string& item);
    std::uint64_t query(const std::string& item) const;
    CountingFilter merged(const CountingFilter& other) const;

    std::size_t size() const { return counters_.size(); }
    int hash_count() const { return k_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<std::uint64_t>& counters() const { return counters_; }

private:
    std::size_t slot(const std::string& item, int i) const;
    std::vector<std::uint64_t> counters_;
    int k_;
    std::uint64_t seed_;
};

// Fields marked redact are removed; everything else passes unchanged.
// Timestamp always survives. Idempotent.
ingest::MonitoringRecord apply_sharing_filter(const PolicySet& policy,
                                              const ingest::MonitoringRecord& record);

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);

// Directory-backed knowledge base: JSON manifest `kb.json` at the root,
// one subdirectory per dataset, JSON-lines feedback log. Single writer,
// multiple readers; writes are serialized by the caller.
class KnowledgeBase {
public:
    // Creates the layout if absent, loads the manifest if present.
    static KnowledgeBase open(const std::string& root);

    const std::string& root() const { return root_; }
    const std::vector<DatasetMeta>& datasets() const { return datasets_; }
    const std::vector<ModelRecord>& models() const { return models_; }
    const PolicySet& policies() const { return policies_; }
    PolicySet& policies() { return policies_; }

    std::string put_dataset(const DataTable& table, DatasetMeta meta);
    DataTable get_dataset(const std::string& id) const;
    const DatasetMeta& dataset_meta(const std::string& id) const;

    std::string put_model(const std::string& artifact_json, ModelRecord record);
    std::string get_model_artifact(const std::string& id) const;
    const ModelRecord* find_model(const std::string& id) const;
    void set_model_metrics(const std::string& id, const eval::MetricsReport& metrics);

    // Append-only; ticks must be nondecreasing across the log.
    void append_feedback(const FeedbackEntry& entry);
    std::vector<FeedbackEntry> feedback() const;

    void save_policies();

private:
    void load();
    void save_manifest();
    std::string root_;
    std::vector<DatasetMeta> datasets_;
    std::vector<ModelRecord> models_;
    PolicySet policies_;
    std::int64_t last_feedback_tick_ = -1;
};

}  // namespace cnsm::kb

#endif
