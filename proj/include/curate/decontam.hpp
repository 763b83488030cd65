#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "curate/error.hpp"
#include "curate/hash.hpp"
#include "curate/record.hpp"
#include "curate/text.hpp"

namespace curate {

// Word-level n-gram contamination detection parameters.
struct DecontamParams {
    std::size_t ngram_n = 8;
    double fuzzy_jaccard = 0.6;
    std::size_t min_hits = 1;

    void validate() const {
        if (ngram_n < 3) throw ConfigError("decontam.ngram_n must be >= 3");
        if (!(fuzzy_jaccard > 0.0 && fuzzy_jaccard <= 1.0)) {
            throw ConfigError("decontam.fuzzy_jaccard must be in (0,1]");
        }
    }
};

// Benchmark-side normalization: lowercase, collapse whitespace, and drop
// tokens with no alphanumeric character. Idempotent.
inline std::vector<std::string> normalize_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (auto tok : split_tokens(text)) {
        std::string lowered = to_lower_ascii(tok);
        bool has_alnum = false;
        for (unsigned char c : lowered) {
            if (std::isalnum(c)) {
                has_alnum = true;
                break;
            }
        }
        if (has_alnum) out.push_back(std::move(lowered));
    }
    return out;
}

inline std::string normalize_text(std::string_view text) {
    std::string out;
    for (const auto& tok : normalize_tokens(text)) {
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

namespace detail {

inline std::uint64_t gram_fingerprint(const std::vector<std::string>& tokens,
                                      std::size_t start, std::size_t len) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = start; i < start + len; ++i) {
        for (unsigned char c : tokens[i]) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= 0x1f;  // token boundary
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::set<std::uint64_t> gram_set(const std::vector<std::string>& tokens,
                                        std::size_t n) {
    std::set<std::uint64_t> grams;
    if (tokens.empty()) return grams;
    if (tokens.size() < n) {
        grams.insert(gram_fingerprint(tokens, 0, tokens.size()));
        return grams;
    }
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        grams.insert(gram_fingerprint(tokens, i, n));
    }
    return grams;
}

}  // namespace detail

// N-gram membership structure over one evaluation suite. Items shorter
// than n words are indexed as their single whole-item gram; the set of
// distinct gram lengths drives window enumeration at scan time.
class BenchmarkIndex {
public:
    BenchmarkIndex() = default;
    BenchmarkIndex(std::string suite, const std::vector<std::pair<std::string, std::string>>& items,
                   const DecontamParams& params)
        : suite_name_(std::move(suite)), ngram_n_(params.ngram_n) {
        params.validate();
        for (const auto& [item_id, text] : items) {
            auto tokens = normalize_tokens(text);
            if (tokens.empty()) continue;
            auto grams = detail::gram_set(tokens, ngram_n_);
            gram_lengths_.insert(std::min(tokens.size(), ngram_n_));
            for (std::uint64_t g : grams) {
                global_.insert(g);
                gram_to_items_[g].insert(item_id);
            }
            per_item_grams_[item_id] = std::move(grams);
        }
    }

    const std::string& suite_name() const { return suite_name_; }
    std::size_t ngram_n() const { return ngram_n_; }
    std::size_t size() const { return global_.size(); }
    bool empty() const { return global_.empty(); }
    const std::set<std::size_t>& gram_lengths() const { return gram_lengths_; }
    const std::map<std::string, std::set<std::uint64_t>>& per_item_grams() const {
        return per_item_grams_;
    }

    bool contains(std::uint64_t gram) const { return global_.count(gram) > 0; }
    const std::set<std::string>* items_for(std::uint64_t gram) const {
        auto it = gram_to_items_.find(gram);
        return it == gram_to_items_.end() ? nullptr : &it->second;
    }

private:
    std::string suite_name_;
    std::size_t ngram_n_ = 8;
    std::set<std::size_t> gram_lengths_;
    std::unordered_set<std::uint64_t> global_;
    std::unordered_map<std::uint64_t, std::set<std::string>> gram_to_items_;
    std::map<std::string, std::set<std::uint64_t>> per_item_grams_;
};

inline BenchmarkIndex build_benchmark_index(
    const std::string& suite,
    const std::vector<std::pair<std::string, std::string>>& items,
    const DecontamParams& params) {
    return BenchmarkIndex(suite, items, params);
}

struct ContaminationReport {
    std::string record_id;
    std::string suite;
    std::set<std::string> matched_items;
    std::size_t hit_count = 0;   // distinct document grams found in the index
    double fuzzy_score = 0.0;    // best per-item n-gram Jaccard
};

// Exact path: flags when at least min_hits distinct document n-grams are
// present in the index. Fuzzy path: flags when the Jaccard similarity
// between the document's gram set and any single item's gram set reaches
// fuzzy_jaccard. Returns nullopt for a clean document.
inline std::optional<ContaminationReport> scan_document(const DocumentRecord& rec,
                                                        const BenchmarkIndex& idx,
                                                        const DecontamParams& params) {
    params.validate();
    if (idx.empty()) return std::nullopt;
    auto tokens = normalize_tokens(rec.content);
    if (tokens.empty()) return std::nullopt;

    // Document grams at every indexed window length.
    std::unordered_set<std::uint64_t> doc_grams;
    for (std::size_t len : idx.gram_lengths()) {
        if (tokens.size() < len) {
            // A document shorter than the window is itself one gram.
            doc_grams.insert(detail::gram_fingerprint(tokens, 0, tokens.size()));
            continue;
        }
        for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
            doc_grams.insert(detail::gram_fingerprint(tokens, i, len));
        }
    }

    ContaminationReport report;
    report.record_id = rec.id;
    report.suite = idx.suite_name();
    std::set<std::string> exact_items;
    std::size_t hits = 0;
    for (std::uint64_t g : doc_grams) {
        if (!idx.contains(g)) continue;
        ++hits;
        if (const auto* items = idx.items_for(g)) {
            exact_items.insert(items->begin(), items->end());
        }
    }
    report.hit_count = hits;

    // Fuzzy comparison against items sharing at least one gram; zero
    // intersection means zero Jaccard, so others cannot qualify.
    double best_fuzzy = 0.0;
    std::string best_item;
    for (const auto& item_id : exact_items) {
        const auto& item_grams = idx.per_item_grams().at(item_id);
        std::size_t inter = 0;
        for (std::uint64_t g : item_grams) {
            if (doc_grams.count(g)) ++inter;
        }
        std::size_t uni = item_grams.size() + doc_grams.size() - inter;
        double j = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
        if (j > best_fuzzy) {
            best_fuzzy = j;
            best_item = item_id;
        }
    }
    report.fuzzy_score = best_fuzzy;

    bool exact_hit = hits >= params.min_hits;
    bool fuzzy_hit = best_fuzzy >= params.fuzzy_jaccard;
    if (!exact_hit && !fuzzy_hit) return std::nullopt;
    if (exact_hit) report.matched_items = exact_items;
    else report.matched_items.insert(best_item);
    return report;
}

struct DetectorMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Standard precision / recall / F1 of scan decisions against labels.
// labeled: (record, is_contaminated) pairs.
inline DetectorMetrics evaluate_detector(
    const std::vector<std::pair<DocumentRecord, bool>>& labeled,
    const BenchmarkIndex& idx, const DecontamParams& params) {
    std::size_t tp = 0, fp = 0, fn = 0, positives = 0;
    for (const auto& [rec, truth] : labeled) {
        if (truth) ++positives;
        bool flagged = scan_document(rec, idx, params).has_value();
        if (flagged && truth) ++tp;
        else if (flagged && !truth) ++fp;
        else if (!flagged && truth) ++fn;
    }
    if (positives == 0) throw UndefinedMetric("no positive labels: recall undefined");
    DetectorMetrics m;
    m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    m.recall = static_cast<double>(tp) / static_cast<double>(positives);
    m.f1 = m.precision + m.recall == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

}  // namespace curate
