#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "curate/manifest.hpp"
#include "curate/record.hpp"

#include "oracles.hpp"

using namespace curate;
namespace fs = std::filesystem;

namespace {

DocumentRecord make_record(const std::string& id, const std::string& content,
                           Modality modality = Modality::Code) {
    DocumentRecord rec;
    rec.id = id;
    rec.content = content;
    rec.modality = modality;
    return validate_record(std::move(rec));
}

}  // namespace

TEST_CASE("validate_record recomputes byte_len and fills defaults") {
    auto rec = make_record("a", "x");
    CHECK(rec.byte_len == 1);
    CHECK(rec.est_tokens == 1);  // ceil(1/4)
    CHECK(rec.language == "unknown");
    CHECK(rec.license == "unknown");

    DocumentRecord longer;
    longer.id = "b";
    longer.content = std::string(9, 'y');
    longer.modality = Modality::Text;
    auto v = validate_record(std::move(longer));
    CHECK(v.byte_len == 9);
    CHECK(v.est_tokens == 3);  // ceil(9/4)
}

TEST_CASE("validate_record rejects malformed records") {
    DocumentRecord no_id;
    no_id.content = "x";
    CHECK_THROWS_AS(validate_record(std::move(no_id)), MalformedRecord);

    DocumentRecord no_content;
    no_content.id = "a";
    CHECK_THROWS_AS(validate_record(std::move(no_content)), MalformedRecord);

    DocumentRecord bad_conf;
    bad_conf.id = "a";
    bad_conf.content = "x";
    bad_conf.language_confidence = 1.3;
    CHECK_THROWS_AS(validate_record(std::move(bad_conf)), MalformedRecord);

    DocumentRecord bad_utf8;
    bad_utf8.id = "a";
    bad_utf8.content = "\xff\xfe";
    CHECK_THROWS_AS(validate_record(std::move(bad_utf8)), EncodingError);

    DocumentRecord bucket_without_signals;
    bucket_without_signals.id = "a";
    bucket_without_signals.content = "x";
    bucket_without_signals.quality_bucket = QualityBucket::High;
    CHECK_THROWS_AS(validate_record(std::move(bucket_without_signals)), MalformedRecord);
}

TEST_CASE("validate_record keeps a supplied token count") {
    DocumentRecord rec;
    rec.id = "a";
    rec.content = "some content here";
    rec.modality = Modality::Text;
    rec.est_tokens = 42;
    auto v = validate_record(std::move(rec));
    CHECK(v.est_tokens == 42);
}

TEST_CASE("provenance_gate decides by license and source") {
    ProvenanceRule rule;
    rule.allowed_licenses = {"mit", "apache-2.0"};
    rule.blocked_sources = {"shady-corp"};

    auto rec = make_record("a", "x");
    rec.license = "mit";
    rec.source_name = "stack";
    CHECK(provenance_gate(rec, rule).keep);

    rec.license = "unknown";
    auto d = provenance_gate(rec, rule);
    CHECK_FALSE(d.keep);
    CHECK(d.reason == "license");

    rec.license = "mit";
    rec.source_name = "shady-corp";
    d = provenance_gate(rec, rule);
    CHECK_FALSE(d.keep);
    CHECK(d.reason == "provenance");

    // With no required license the unknown record passes.
    rule.require_known_license = false;
    rec.source_name = "stack";
    rec.license = "unknown";
    CHECK(provenance_gate(rec, rule).keep);
}

TEST_CASE("provenance_gate is pure") {
    ProvenanceRule rule;
    rule.allowed_licenses = {"mit"};
    auto rec = make_record("a", "x");
    rec.license = "gpl-3.0";
    auto first = provenance_gate(rec, rule);
    for (int i = 0; i < 10; ++i) {
        auto again = provenance_gate(rec, rule);
        CHECK(again.keep == first.keep);
        CHECK(again.reason == first.reason);
    }
}

TEST_CASE("retention_report matches the staged ratios") {
    StageStats s1{"license", 1000, 500, 100000, 50000, {}};
    StageStats s2{"quality", 500, 180, 50000, 18000, {}};
    auto report = retention_report({s1, s2});
    CHECK(report.rows[0].stage_record_retention == Catch::Approx(0.5));
    CHECK(report.rows[1].stage_record_retention == Catch::Approx(0.36));
    CHECK(report.rows[1].cumulative_record_retention == Catch::Approx(0.18));
    CHECK(report.cumulative_record_retention == Catch::Approx(0.18));
}

TEST_CASE("retention_report identity and deep-cut cases") {
    StageStats identity{"noop", 100, 100, 1000, 1000, {}};
    auto report = retention_report({identity});
    CHECK(report.cumulative_record_retention == Catch::Approx(1.0));

    StageStats a{"s1", 100, 60, 1000, 600, {}};
    StageStats b{"s2", 60, 30, 600, 300, {}};
    StageStats c{"s3", 30, 10, 300, 100, {}};
    StageStats d{"s4", 10, 3, 100, 30, {}};
    auto deep = retention_report({a, b, c, d});
    CHECK(deep.cumulative_record_retention == Catch::Approx(0.03));
}

TEST_CASE("retention_report errors on an empty pipeline") {
    CHECK_THROWS_AS(retention_report({}), EmptyPipeline);
    StageStats zero{"s", 0, 0, 0, 0, {}};
    CHECK_THROWS_AS(retention_report({zero}), EmptyPipeline);
}

TEST_CASE("cumulative retention equals final-out over first-in exactly") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<StageStats> stats;
        std::uint64_t records = 1 + rng() % 100000;
        std::uint64_t tokens = records * 10;
        std::uint64_t first_records = records;
        int n_stages = 1 + static_cast<int>(rng() % 6);
        for (int s = 0; s < n_stages; ++s) {
            std::uint64_t out = records == 0 ? 0 : rng() % (records + 1);
            std::uint64_t tokens_out = tokens == 0 ? 0 : rng() % (tokens + 1);
            stats.push_back({"s" + std::to_string(s), records, out, tokens, tokens_out, {}});
            records = out;
            tokens = tokens_out;
        }
        auto report = retention_report(stats);
        double expected = static_cast<double>(stats.back().records_out) /
                          static_cast<double>(first_records);
        CHECK(report.cumulative_record_retention == expected);  // bit-exact
    }
}

TEST_CASE("stage stats merge deterministically") {
    StageStats a{"s", 10, 8, 100, 80, {{"size", 2}}};
    StageStats b{"s", 20, 15, 200, 150, {{"size", 3}, {"binary", 2}}};
    a.merge(b);
    CHECK(a.records_in == 30);
    CHECK(a.records_out == 23);
    CHECK(a.rejections["size"] == 5);
    CHECK(a.rejections["binary"] == 2);
}

TEST_CASE("manifest round-trip preserves content bytes and metadata") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        DocumentRecord rec;
        rec.id = "doc" + std::to_string(trial);
        rec.content = oracle::random_utf8(rng, 1, 120);
        rec.modality = trial % 2 ? Modality::Code : Modality::Math;
        rec.source_name = "unit";
        if (trial % 3 == 0) rec.path = "pkg/mod" + std::to_string(trial) + ".py";
        if (trial % 4 == 0) rec.repo_id = "repo" + std::to_string(trial % 7);
        if (trial % 5 == 0) rec.origin_url = "https://example.org/x";
        rec.language = trial % 2 ? "python" : "unknown";
        rec.language_confidence = trial % 2 ? 0.97 : 0.0;
        rec.license = "mit";
        if (trial % 6 == 0) rec.external_score = 0.25 + 0.5 * (trial % 3) / 3.0;
        if (trial % 7 == 0) rec.flags = {"filter:size", "dedup:near"};
        auto valid = validate_record(std::move(rec));
        if (trial % 8 == 0) {
            valid.signals = SignalVector{};
            valid.signals->alnum_ratio = 0.5;
            valid.quality_bucket = QualityBucket::Low;
        }

        auto round = record_from_line(record_to_line(valid));
        CHECK(round.content == valid.content);
        CHECK(round.id == valid.id);
        CHECK(round.modality == valid.modality);
        CHECK(round.path == valid.path);
        CHECK(round.repo_id == valid.repo_id);
        CHECK(round.language == valid.language);
        CHECK(round.language_confidence == valid.language_confidence);
        CHECK(round.license == valid.license);
        CHECK(round.origin_url == valid.origin_url);
        CHECK(round.byte_len == valid.byte_len);
        CHECK(round.est_tokens == valid.est_tokens);
        CHECK(round.flags == valid.flags);
        CHECK(round.external_score.has_value() == valid.external_score.has_value());
        CHECK(round.quality_bucket == valid.quality_bucket);
        // Serialized form is stable: a second trip is byte-identical.
        CHECK(record_to_line(round) == record_to_line(valid));
    }
}

TEST_CASE("manifest shards write and read in order") {
    fs::path dir = fs::temp_directory_path() / "curate_shard_test";
    fs::remove_all(dir);
    std::vector<DocumentRecord> records;
    for (int i = 0; i < 25; ++i) {
        records.push_back(make_record("id" + std::to_string(100 + i), "content " + std::to_string(i)));
    }
    auto paths = write_shards(dir, "filter", records, 10);
    REQUIRE(paths.size() == 3);
    CHECK(paths[0].filename() == "filter.0.records");
    CHECK(paths[2].filename() == "filter.2.records");

    auto round = read_manifest(dir);
    REQUIRE(round.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(round[i].id == records[i].id);
        CHECK(round[i].content == records[i].content);
    }
    fs::remove_all(dir);
}

TEST_CASE("manifest parsing rejects bad lines") {
    CHECK_THROWS_AS(record_from_line("not json"), MalformedRecord);
    CHECK_THROWS_AS(record_from_line("{\"content\":\"x\",\"modality\":\"code\"}"),
                    MalformedRecord);
    CHECK_THROWS_AS(record_from_line("{\"id\":\"a\",\"content\":\"x\",\"modality\":\"weird\"}"),
                    MalformedRecord);
}
