#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "doctest.h"
#include "error.hpp"
#include "kb.hpp"

using namespace cnsm;
using namespace cnsm::kb;
namespace fs = std::filesystem;

namespace {

std::string temp_root(const char* tag) {
    fs::path p = fs::temp_directory_path() /
                 (std::string("cnsm_kb_test_") + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    return p.string();
}

DataTable small_table() {
    DataTable t;
    t.add_numeric("timestamp_ms", {0, 10, 20});
    t.add_numeric("wb_cqi", {7, 8, 9});
    return t;
}

}  // namespace

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("a") != sha256_hex("b"));
}

TEST_CASE("kb open creates the layout and reopening keeps state") {
    std::string root = temp_root("open");
    {
        KnowledgeBase kb = KnowledgeBase::open(root);
        CHECK(fs::exists(fs::path(root) / "kb.json"));
        CHECK(fs::exists(fs::path(root) / "datasets"));
        CHECK(fs::exists(fs::path(root) / "models"));
        DatasetMeta meta;
        meta.id = "raw-1";
        meta.kind = DatasetKind::raw;
        meta.scenario = "walk";
        kb.put_dataset(small_table(), meta);
    }
    KnowledgeBase again = KnowledgeBase::open(root);
    REQUIRE(again.datasets().size() == 1);
    CHECK(again.datasets()[0].id == "raw-1");
    CHECK(again.datasets()[0].row_count == 3);
    CHECK(again.datasets()[0].checksum.size() == 64);
    CHECK(!again.datasets()[0].created_at.empty());
    CHECK(again.get_dataset("raw-1") == small_table());
    fs::remove_all(root);
}

TEST_CASE("dataset conflicts and lineage preconditions") {
    std::string root = temp_root("lineage");
    KnowledgeBase kb = KnowledgeBase::open(root);
    DatasetMeta raw;
    raw.id = "d1";
    kb.put_dataset(small_table(), raw);
    CHECK_THROWS_AS(kb.put_dataset(small_table(), raw), ConflictError);

    DatasetMeta orphan;
    orphan.id = "p1";
    orphan.kind = DatasetKind::processed;
    orphan.parent_id = "missing";
    CHECK_THROWS_AS(kb.put_dataset(small_table(), orphan), PreconditionError);

    orphan.parent_id = "d1";
    kb.put_dataset(small_table(), orphan);
    CHECK(kb.dataset_meta("p1").parent_id == "d1");
    CHECK_THROWS_AS(kb.get_dataset("ghost"), PreconditionError);
    fs::remove_all(root);
}

TEST_CASE("model artifacts round trip; metrics appear only after validation") {
    std::string root = temp_root("models");
    KnowledgeBase kb = KnowledgeBase::open(root);
    ModelRecord rec;
    rec.id = "m1";
    rec.model_kind = "lasso";
    rec.feature_set_id = "fs1";
    kb.put_model("{\"kind\":\"lasso\"}", rec);
    CHECK(kb.get_model_artifact("m1") == "{\"kind\":\"lasso\"}");
    REQUIRE(kb.find_model("m1") != nullptr);
    CHECK_FALSE(kb.find_model("m1")->metrics.has_value());

    eval::MetricsReport m;
    m.rmse_raw = 1.25;
    m.n = 10;
    kb.set_model_metrics("m1", m);
    REQUIRE(kb.find_model("m1")->metrics.has_value());
    CHECK(kb.find_model("m1")->metrics->rmse_raw == 1.25);

    KnowledgeBase again = KnowledgeBase::open(root);
    REQUIRE(again.find_model("m1") != nullptr);
    CHECK(again.find_model("m1")->metrics->n == 10);

    CHECK_THROWS_AS(kb.put_model("{}", rec), ConflictError);
    CHECK_THROWS_AS(kb.get_model_artifact("nope"), PreconditionError);
    fs::remove_all(root);
}

TEST_CASE("feedback log is append-only with nondecreasing ticks") {
    std::string root = temp_root("feedback");
    KnowledgeBase kb = KnowledgeBase::open(root);
    kb.append_feedback({5, 9.0, 8.0, ""});
    kb.append_feedback({5, 9.5, 9.0, "swap"});
    kb.append_feedback({6, 9.0, 9.0, ""});
    CHECK_THROWS_AS(kb.append_feedback({4, 1.0, 1.0, ""}), PreconditionError);

    KnowledgeBase again = KnowledgeBase::open(root);
    std::vector<FeedbackEntry> log = again.feedback();
    REQUIRE(log.size() == 3);
    CHECK(log[1].action_taken == "swap");
    CHECK_THROWS_AS(again.append_feedback({2, 0, 0, ""}), PreconditionError);
    again.append_feedback({6, 1.0, 1.0, ""});
    fs::remove_all(root);
}

TEST_CASE("counting filter has no false negatives") {
    CountingFilter f(4096, 3, 7);
    std::mt19937_64 rng(3);
    std::vector<std::string> items;
    for (int i = 0; i < 500; ++i) items.push_back("item-" + std::to_string(rng()));
    for (const std::string& s : items) f.insert(s);
    for (const std::string& s : items) CHECK(f.query(s) >= 1);
}

TEST_CASE("counting filter counts duplicates at least as often as inserted") {
    CountingFilter f(1024, 3, 1);
    for (int i = 0; i < 5; ++i) f.insert("dup");
    CHECK(f.query("dup") >= 5);
    CHECK(f.query("never") <= 5);  // collisions may lift it, never above load
}

TEST_CASE("counting filter merge is commutative and adds counts") {
    CountingFilter a(512, 3, 9), b(512, 3, 9);
    a.insert("x");
    a.insert("y");
    b.insert("x");
    b.insert("z");
    CountingFilter ab = a.merged(b);
    CountingFilter ba = b.merged(a);
    CHECK(ab.counters() == ba.counters());
    CHECK(ab.query("x") >= 2);
    CHECK(ab.query("y") >= 1);
    CHECK(ab.query("z") >= 1);

    CHECK_THROWS_AS(a.merged(CountingFilter(512, 3, 10)), IncompatibleFilterError);
    CHECK_THROWS_AS(a.merged(CountingFilter(256, 3, 9)), IncompatibleFilterError);
    CHECK_THROWS_AS(a.merged(CountingFilter(512, 4, 9)), IncompatibleFilterError);
    CHECK_THROWS_AS(CountingFilter(0, 3, 1), PreconditionError);
}

TEST_CASE("sharing filter redacts exactly the configured fields") {
    PolicySet policy;
    policy.sharing_filters["ue_id"] = ShareRule::redact;
    policy.sharing_filters["rsrp"] = ShareRule::redact;
    policy.sharing_filters["wb_cqi"] = ShareRule::share;

    ingest::MonitoringRecord rec;
    rec.timestamp_ms = 1234;
    rec.ue_id = "ue7";
    rec.gnb_id = "g1";
    rec.metrics = {{"rsrp", -90.0}, {"wb_cqi", 11.0}, {"phr", 12.0}};

    ingest::MonitoringRecord out = apply_sharing_filter(policy, rec);
    CHECK(out.timestamp_ms == 1234);
    CHECK(out.ue_id.empty());
    CHECK(out.gnb_id == "g1");
    CHECK(out.metrics.count("rsrp") == 0);
    CHECK(out.metrics.at("wb_cqi") == 11.0);
    CHECK(out.metrics.at("phr") == 12.0);  // unlisted fields pass

    // idempotent
    ingest::MonitoringRecord twice = apply_sharing_filter(policy, out);
    CHECK(twice.metrics == out.metrics);
    CHECK(twice.ue_id == out.ue_id);

    // empty policy is the identity
    ingest::MonitoringRecord same = apply_sharing_filter(PolicySet{}, rec);
    CHECK(same.ue_id == rec.ue_id);
    CHECK(same.metrics == rec.metrics);

    // timestamp survives even when everything is redacted
    PolicySet all;
    for (const char* f : {"ue_id", "gnb_id", "rsrp", "wb_cqi", "phr", "timestamp_ms"})
        all.sharing_filters[f] = ShareRule::redact;
    ingest::MonitoringRecord bare = apply_sharing_filter(all, rec);
    CHECK(bare.timestamp_ms == 1234);
    CHECK(bare.metrics.empty());
    CHECK(bare.ue_id.empty());
    CHECK(bare.gnb_id.empty());
}

TEST_CASE("policies persist through the manifest") {
    std::string root = temp_root("policy");
    {
        KnowledgeBase kb = KnowledgeBase::open(root);
        kb.policies().sharing_filters["ue_id"] = ShareRule::redact;
        kb.policies().slice_priorities = {"ehealth", "video", "iot"};
        kb.policies().handover_restrictions = {{"gnb-1", "gnb-3"}};
        kb.save_policies();
    }
    KnowledgeBase again = KnowledgeBase::open(root);
    CHECK(again.policies().sharing_filters.at("ue_id") == ShareRule::redact);
    CHECK(again.policies().slice_priorities ==
          std::vector<std::string>{"ehealth", "video", "iot"});
    REQUIRE(again.policies().handover_restrictions.size() == 1);
    CHECK(again.policies().handover_restrictions[0].first == "gnb-1");
    fs::remove_all(root);
}

TEST_CASE("dataset kind names round trip") {
    for (DatasetKind k : {DatasetKind::raw, DatasetKind::processed, DatasetKind::feature_matrix})
        CHECK(dataset_kind_from_name(dataset_kind_name(k)) == k);
    CHECK_THROWS_AS(dataset_kind_from_name("mystery"), ParseError);
}
