#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "curate/filters.hpp"
#include "curate/signals.hpp"

#include "oracles.hpp"

using namespace curate;

namespace {

DocumentRecord make_record(const std::string& id, const std::string& content,
                           const std::string& path = "", const std::string& language = "unknown",
                           double confidence = 0.0) {
    DocumentRecord rec;
    rec.id = id;
    rec.content = content;
    rec.modality = Modality::Code;
    rec.path = path;
    rec.language = language;
    rec.language_confidence = confidence;
    return validate_record(std::move(rec));
}

const char* kPythonSource =
    "import os\n"
    "import sys\n"
    "\n"
    "def main():\n"
    "    \"\"\"Entry point.\"\"\"\n"
    "    value = os.getenv('HOME')\n"
    "    if value is None:\n"
    "        return 1\n"
    "    print(value)\n"
    "    return 0\n"
    "\n"
    "def helper(x):\n"
    "    return x + 1\n";

}  // namespace

TEST_CASE("identify_language maps extensions with high confidence") {
    auto rec = make_record("a", kPythonSource, "src/a.py");
    auto guess = identify_language(rec);
    CHECK(guess.language == "python");
    CHECK(guess.confidence >= 0.9);
}

TEST_CASE("identify_language gives low confidence on control-character soup") {
    std::mt19937_64 rng(3);
    std::string noise;
    for (int i = 0; i < 400; ++i) noise.push_back(static_cast<char>(1 + rng() % 127));
    auto rec = make_record("n", noise);
    auto guess = identify_language(rec);
    CHECK(guess.confidence < 0.65);
}

TEST_CASE("identify_language rates a mixed-language file below a pure one") {
    auto pure = make_record("p", kPythonSource, "a.py");
    std::string mixed_content = std::string(kPythonSource) +
        "function jsHelper() { console.log('x'); }\n"
        "const v = 1;\n"
        "var w = 2;\n"
        "let u = 3;\n";
    auto mixed = make_record("m", mixed_content, "a.py");
    auto pure_guess = identify_language(pure);
    auto mixed_guess = identify_language(mixed);
    CHECK(mixed_guess.confidence < pure_guess.confidence);
}

TEST_CASE("identify_language detects english prose without an extension") {
    auto rec = make_record("e",
                           "The quick brown fox jumps over the lazy dog and the "
                           "story of the fox is told in the back of the book.");
    auto guess = identify_language(rec);
    CHECK(guess.language == "english");
    CHECK(guess.confidence >= 0.65);
}

TEST_CASE("identify_language errors on empty content") {
    DocumentRecord rec;
    rec.id = "x";
    rec.content = "";
    CHECK_THROWS_AS(identify_language(rec), EmptyDocument);
}

TEST_CASE("rule_filter applies gates in order") {
    RuleConfig cfg;
    cfg.max_bytes = 1 << 20;
    cfg.allowed_extensions = {".py"};

    auto big = make_record("big", std::string(2 << 20, 'a'), "a.py", "python", 0.9);
    auto d = rule_filter(big, cfg);
    CHECK_FALSE(d.keep);
    CHECK(d.reason == "size");

    auto exe = make_record("exe", "MZ binary", "tool.exe", "unknown", 0.9);
    d = rule_filter(exe, cfg);
    CHECK_FALSE(d.keep);
    CHECK(d.reason == "extension");

    std::string control(100, '\x01');
    auto binary = make_record("bin", control, "b.py", "python", 0.9);
    d = rule_filter(binary, cfg);
    CHECK_FALSE(d.keep);
    CHECK(d.reason == "binary");

    auto unsure = make_record("unsure", "print('hi')\n", "c.py", "python", 0.3);
    d = rule_filter(unsure, cfg);
    CHECK_FALSE(d.keep);
    CHECK(d.reason == "language_confidence");

    auto clean = make_record("ok", "print('hi')\n", "d.py", "python", 0.95);
    CHECK(rule_filter(clean, cfg).keep);
}

TEST_CASE("rule_filter is monotone in max_bytes") {
    std::mt19937_64 rng(17);
    RuleConfig small_cfg;
    RuleConfig big_cfg;
    for (int trial = 0; trial < 100; ++trial) {
        small_cfg.max_bytes = 1 + rng() % 500;
        big_cfg.max_bytes = small_cfg.max_bytes + rng() % 500;
        auto rec = make_record("r", oracle::random_utf8(rng, 1, 300), "x.py", "python", 0.9);
        if (rule_filter(rec, small_cfg).keep) {
            CHECK(rule_filter(rec, big_cfg).keep);
        }
    }
}

TEST_CASE("compute_signals counts characters per the fixed definitions") {
    auto rec = make_record("a", "abc 123!");
    auto sv = compute_signals(rec);
    CHECK(sv.alnum_ratio == Catch::Approx(6.0 / 8.0));
    CHECK(sv.whitespace_ratio == Catch::Approx(1.0 / 8.0));
}

TEST_CASE("compute_signals comment-to-code ratio") {
    std::string content =
        "# comment one\n"
        "# comment two\n";
    for (int i = 0; i < 8; ++i) content += "x = " + std::to_string(i) + "\n";
    auto rec = make_record("a", content, "a.py", "python", 0.9);
    auto sv = compute_signals(rec);
    CHECK(sv.comment_code_ratio == Catch::Approx(0.25));
}

TEST_CASE("compute_signals flags a whole-content base64 run") {
    std::string run;
    const char* alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    for (int i = 0; i < 128; ++i) run.push_back(alphabet[i % 64]);
    auto rec = make_record("a", run);
    auto sv = compute_signals(rec);
    CHECK(sv.encoded_data_pct == Catch::Approx(1.0));

    auto small = compute_signals(make_record("b", "QUJD QUJD"));  // runs < 64 chars
    CHECK(small.encoded_data_pct == 0.0);
}

TEST_CASE("compute_signals docstring density and printy statements") {
    auto rec = make_record("a", kPythonSource, "a.py", "python", 0.9);
    auto sv = compute_signals(rec);
    CHECK(sv.docstring_density == Catch::Approx(0.5));  // main documented, helper not
    CHECK(sv.printy_stmt_pct > 0.0);                     // the print(value) line
    CHECK(sv.lines_per_function == Catch::Approx(11.0 / 2.0));
}

TEST_CASE("compute_signals quoted fraction and trailing comments") {
    std::string content =
        "x = \"abcd\"  # trailing note\n"
        "y = 2\n";
    auto rec = make_record("a", content, "a.py", "python", 0.9);
    auto sv = compute_signals(rec);
    CHECK(sv.quoted_fraction == Catch::Approx(4.0 / content.size()));
    CHECK(sv.inline_explanation_freq == Catch::Approx(50.0));  // 1 of 2 lines
}

TEST_CASE("compute_signals duplicate gram fraction") {
    // 12 tokens of the same word: 8 five-grams, all identical, 7 repeats.
    std::string content;
    for (int i = 0; i < 12; ++i) content += "spam ";
    auto sv = compute_signals(make_record("a", content));
    CHECK(sv.duplicate_gram_fraction == Catch::Approx(7.0 / 8.0));
}

TEST_CASE("signal ranges hold on arbitrary UTF-8 input") {
    std::mt19937_64 rng(23);
    const char* langs[] = {"python", "cpp", "javascript", "unknown"};
    for (int trial = 0; trial < 300; ++trial) {
        auto rec = make_record("f" + std::to_string(trial), oracle::random_utf8(rng, 1, 400),
                               "", langs[trial % 4], 0.5);
        auto sv = compute_signals(rec);
        for (const auto& name : SignalVector::names()) {
            double v = sv.get(name);
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
        }
        CHECK(sv.alnum_ratio <= 1.0);
        CHECK(sv.quoted_fraction <= 1.0);
        CHECK(sv.encoded_data_pct <= 1.0);
        CHECK(sv.duplicate_gram_fraction <= 1.0);
        CHECK(sv.whitespace_ratio <= 1.0);
        CHECK(sv.printy_stmt_pct <= 1.0);
        CHECK(sv.char_token_ratio > 0.0);
    }
}

TEST_CASE("compute_signals is deterministic") {
    auto rec = make_record("a", kPythonSource, "a.py", "python", 0.9);
    auto first = compute_signals(rec);
    for (int i = 0; i < 5; ++i) {
        auto again = compute_signals(rec);
        for (const auto& name : SignalVector::names()) {
            CHECK(again.get(name) == first.get(name));
        }
    }
}

TEST_CASE("bucket_quality splits strict orders at the stated percentiles") {
    BucketThresholds th;
    th.high_percentile = 0.8;
    th.low_percentile = 0.2;
    th.weights = {{"alnum_ratio", 1.0}};
    std::vector<SignalVector> signals(10);
    for (int i = 0; i < 10; ++i) signals[i].alnum_ratio = 0.05 + 0.09 * i;
    auto buckets = bucket_quality(signals, th);
    int high = 0, low = 0, medium = 0;
    for (auto b : buckets) {
        if (b == QualityBucket::High) ++high;
        else if (b == QualityBucket::Low) ++low;
        else ++medium;
    }
    CHECK(high == 2);
    CHECK(low == 2);
    CHECK(medium == 6);
    // The top two scores are the High ones.
    CHECK(buckets[9] == QualityBucket::High);
    CHECK(buckets[8] == QualityBucket::High);
    CHECK(buckets[0] == QualityBucket::Low);
    CHECK(buckets[1] == QualityBucket::Low);
}

TEST_CASE("bucket_quality degenerate distributions go to Medium") {
    BucketThresholds th;
    std::vector<SignalVector> identical(7);
    for (auto b : bucket_quality(identical, th)) CHECK(b == QualityBucket::Medium);

    std::vector<SignalVector> single(1);
    auto buckets = bucket_quality(single, th);
    REQUIRE(buckets.size() == 1);
    CHECK(buckets[0] == QualityBucket::Medium);
}

TEST_CASE("bucket_quality is invariant under positive affine transforms") {
    std::mt19937_64 rng(29);
    BucketThresholds th;
    std::vector<SignalVector> base(20);
    for (auto& sv : base) {
        sv.alnum_ratio = (rng() % 1000) / 1000.0;
        sv.comment_code_ratio = (rng() % 500) / 100.0;
        sv.docstring_density = (rng() % 1000) / 1000.0;
    }
    auto transformed = base;
    for (auto& sv : transformed) {
        sv.comment_code_ratio = 3.5 * sv.comment_code_ratio + 2.0;
    }
    auto a = bucket_quality(base, th);
    auto b = bucket_quality(transformed, th);
    CHECK(a == b);
}

TEST_CASE("bucket counts stay within one of the quantile formula") {
    std::mt19937_64 rng(31);
    BucketThresholds th;
    th.weights = {{"alnum_ratio", 1.0}};
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t n = 2 + rng() % 60;
        std::vector<SignalVector> signals(n);
        std::set<double> used;
        for (auto& sv : signals) {
            double v;
            do {
                v = (rng() % 100000) / 100000.0;
            } while (!used.insert(v).second);
            sv.alnum_ratio = v;
        }
        auto buckets = bucket_quality(signals, th);
        long high = std::count(buckets.begin(), buckets.end(), QualityBucket::High);
        double expected = std::ceil((1.0 - th.high_percentile) * static_cast<double>(n));
        CHECK(std::abs(high - static_cast<long>(expected)) <= 1);
    }
}

TEST_CASE("bucket thresholds validate percentile ordering") {
    BucketThresholds th;
    th.high_percentile = 0.2;
    th.low_percentile = 0.8;
    std::vector<SignalVector> signals(3);
    CHECK_THROWS_AS(bucket_quality(signals, th), ConfigError);
}
