#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "curate/decontam.hpp"

#include "oracles.hpp"

using namespace curate;

namespace {

DocumentRecord make_record(const std::string& id, const std::string& content) {
    DocumentRecord rec;
    rec.id = id;
    rec.content = content;
    rec.modality = Modality::Text;
    return validate_record(std::move(rec));
}

std::string random_words(std::mt19937_64& rng, std::size_t count, const std::string& prefix) {
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
        if (i) out += ' ';
        out += prefix + std::to_string(rng() % 100000) + "q" + std::to_string(i);
    }
    return out;
}

}  // namespace

TEST_CASE("benchmark index counts n-gram windows") {
    DecontamParams p;
    std::string ten_words = "alpha bravo charlie delta echo foxtrot golf hotel india juliett";
    auto idx = build_benchmark_index("suite", {{"item1", ten_words}}, p);
    CHECK(idx.size() == 3);  // 10 - 8 + 1

    auto empty = build_benchmark_index("empty", {}, p);
    CHECK(empty.empty());
}

TEST_CASE("short items are indexed as a single whole-item gram") {
    DecontamParams p;
    auto idx = build_benchmark_index("suite", {{"short", "tiny little item"}}, p);
    CHECK(idx.size() == 1);
    CHECK(idx.gram_lengths() == std::set<std::size_t>{3});

    // A document embedding the short item verbatim is still caught.
    auto rec = make_record("d", "padding words around tiny little item and more padding here");
    auto report = scan_document(rec, idx, p);
    REQUIRE(report.has_value());
    CHECK(report->matched_items == std::set<std::string>{"short"});
}

TEST_CASE("shared sentences map to every containing item") {
    DecontamParams p;
    std::string shared = "one two three four five six seven eight";
    auto idx = build_benchmark_index(
        "suite", {{"a", shared + " tail_a extra_a"}, {"b", shared + " tail_b extra_b"}}, p);
    auto rec = make_record("d", shared);
    auto report = scan_document(rec, idx, p);
    REQUIRE(report.has_value());
    CHECK(report->matched_items == std::set<std::string>{"a", "b"});
}

TEST_CASE("verbatim embeddings are flagged and disjoint documents are clean") {
    std::mt19937_64 rng(3);
    DecontamParams p;
    std::vector<std::pair<std::string, std::string>> items;
    for (int i = 0; i < 20; ++i) {
        items.push_back({"item" + std::to_string(i), random_words(rng, 12, "bench")});
    }
    auto idx = build_benchmark_index("suite", items, p);

    auto contaminated =
        make_record("dirty", random_words(rng, 30, "pad") + " " + items[7].second + " " +
                                 random_words(rng, 10, "tail"));
    auto report = scan_document(contaminated, idx, p);
    REQUIRE(report.has_value());
    CHECK(report->hit_count >= p.min_hits);
    CHECK(report->matched_items.count("item7") == 1);

    auto clean = make_record("clean", random_words(rng, 50, "other"));
    CHECK_FALSE(scan_document(clean, idx, p).has_value());
}

TEST_CASE("fuzzy path matches rewritten variants via n-gram Jaccard") {
    DecontamParams p;
    p.ngram_n = 3;
    p.min_hits = 1000;  // force the fuzzy path to do the flagging
    std::string item = "the quick brown fox jumps over the lazy dog today";
    auto idx = build_benchmark_index("suite", {{"item", item}}, p);

    // Two of ten words replaced.
    std::string rewritten = "the quick brown cat jumps over the lazy dog now";
    double expected =
        oracle::jaccard(oracle::word_ngrams(item, 3), oracle::word_ngrams(rewritten, 3));
    auto rec = make_record("d", rewritten);

    DecontamParams strict = p;
    strict.fuzzy_jaccard = expected + 0.05;
    CHECK_FALSE(scan_document(rec, idx, strict).has_value());

    DecontamParams loose = p;
    loose.fuzzy_jaccard = std::max(0.01, expected - 0.05);
    auto report = scan_document(rec, idx, loose);
    REQUIRE(report.has_value());
    CHECK(report->fuzzy_score == Catch::Approx(expected));
}

TEST_CASE("evaluate_detector computes exact metrics") {
    std::mt19937_64 rng(9);
    DecontamParams p;
    std::vector<std::pair<std::string, std::string>> items;
    for (int i = 0; i < 10; ++i) {
        items.push_back({"item" + std::to_string(i), random_words(rng, 15, "bm")});
    }
    auto idx = build_benchmark_index("suite", items, p);

    std::vector<std::pair<DocumentRecord, bool>> labeled;
    // 9 true contaminations, all detectable.
    for (int i = 0; i < 9; ++i) {
        labeled.push_back({make_record("c" + std::to_string(i),
                                       random_words(rng, 20, "fill") + " " + items[i].second),
                           true});
    }
    // One document that embeds benchmark text but is labeled clean: the one
    // false positive among ten flags.
    labeled.push_back({make_record("fp", items[9].second), false});
    // Clean documents that stay clean.
    for (int i = 0; i < 10; ++i) {
        labeled.push_back({make_record("k" + std::to_string(i), random_words(rng, 25, "safe")),
                           false});
    }

    auto metrics = evaluate_detector(labeled, idx, p);
    CHECK(metrics.precision == Catch::Approx(0.9));
    CHECK(metrics.recall == Catch::Approx(1.0));
    CHECK(metrics.f1 == Catch::Approx(2.0 * 0.9 / 1.9));
}

TEST_CASE("evaluate_detector flags the exact true set as perfect") {
    std::mt19937_64 rng(11);
    DecontamParams p;
    std::vector<std::pair<std::string, std::string>> items;
    for (int i = 0; i < 5; ++i) {
        items.push_back({"i" + std::to_string(i), random_words(rng, 12, "bn")});
    }
    auto idx = build_benchmark_index("suite", items, p);
    std::vector<std::pair<DocumentRecord, bool>> labeled;
    for (int i = 0; i < 5; ++i) {
        labeled.push_back({make_record("t" + std::to_string(i), items[i].second), true});
        labeled.push_back({make_record("u" + std::to_string(i), random_words(rng, 12, "ok")),
                           false});
    }
    auto metrics = evaluate_detector(labeled, idx, p);
    CHECK(metrics.precision == 1.0);
    CHECK(metrics.recall == 1.0);
    CHECK(metrics.f1 == 1.0);
}

TEST_CASE("evaluate_detector requires positive labels") {
    DecontamParams p;
    auto idx = build_benchmark_index("suite", {{"i", "a b c d e f g h i"}}, p);
    std::vector<std::pair<DocumentRecord, bool>> labeled{
        {make_record("x", "unrelated words entirely here now"), false}};
    CHECK_THROWS_AS(evaluate_detector(labeled, idx, p), UndefinedMetric);
}

TEST_CASE("decreasing thresholds never unflags a document") {
    std::mt19937_64 rng(13);
    std::vector<std::pair<std::string, std::string>> items;
    for (int i = 0; i < 8; ++i) {
        items.push_back({"i" + std::to_string(i), random_words(rng, 14, "x")});
    }
    DecontamParams base;
    auto idx = build_benchmark_index("suite", items, base);
    for (int trial = 0; trial < 40; ++trial) {
        std::string content = random_words(rng, 10, "y");
        if (trial % 2) content += " " + items[trial % 8].second;
        auto rec = make_record("m" + std::to_string(trial), content);

        DecontamParams strict = base;
        strict.min_hits = 2 + rng() % 4;
        strict.fuzzy_jaccard = 0.5 + (rng() % 40) / 100.0;
        DecontamParams loose = strict;
        loose.min_hits = 1 + rng() % strict.min_hits;
        loose.fuzzy_jaccard = strict.fuzzy_jaccard - 0.2;

        if (scan_document(rec, idx, strict).has_value()) {
            CHECK(scan_document(rec, idx, loose).has_value());
        }
    }
}

TEST_CASE("normalization is idempotent") {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 100; ++trial) {
        std::string text = oracle::random_utf8(rng, 0, 200);
        std::string once = normalize_text(text);
        CHECK(normalize_text(once) == once);
    }
    CHECK(normalize_text("  The  QUICK   brown ... fox!  ") == "the quick brown fox!");
}

TEST_CASE("exact-overlap completeness on embedded windows") {
    // Any document containing >= n consecutive normalized words of an item
    // must be flagged.
    std::mt19937_64 rng(17);
    DecontamParams p;
    std::string item = random_words(rng, 20, "bench");
    auto idx = build_benchmark_index("suite", {{"item", item}}, p);
    auto words = oracle::lower_tokens(item);
    for (int start = 0; start + 8 <= 20; start += 3) {
        std::string window;
        for (int w = start; w < start + 8; ++w) {
            if (w > start) window += ' ';
            window += words[w];
        }
        auto rec = make_record("w" + std::to_string(start),
                               random_words(rng, 5, "pre") + " " + window + " " +
                                   random_words(rng, 5, "post"));
        CHECK(scan_document(rec, idx, p).has_value());
    }
}
