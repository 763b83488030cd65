#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "curate/error.hpp"
#include "curate/record.hpp"
#include "curate/signals.hpp"
#include "curate/text.hpp"

namespace curate {

// Rule-based structural gate: size, extension allowlist, binary content,
// and language confidence.
struct RuleConfig {
    std::uint64_t max_bytes = 1 << 20;  // 1 MiB
    std::set<std::string> allowed_extensions;  // empty = no extension gate
    double min_language_confidence = 0.65;
    double binary_nonprintable_threshold = 0.30;

    void validate() const {
        if (max_bytes == 0) throw ConfigError("filters.max_bytes must be > 0");
        if (min_language_confidence < 0.0 || min_language_confidence > 1.0) {
            throw ConfigError("filters.min_language_confidence out of [0,1]");
        }
        if (binary_nonprintable_threshold < 0.0 || binary_nonprintable_threshold > 1.0) {
            throw ConfigError("filters.binary_nonprintable_threshold out of [0,1]");
        }
    }
};

struct LanguageGuess {
    std::string language = "unknown";
    double confidence = 0.0;
};

// A detector maps a record to (label, confidence). The built-in fallback
// below can be replaced by any external model wrapped in this signature.
using LanguageDetector = std::function<LanguageGuess(const DocumentRecord&)>;

namespace detail {

inline std::string path_extension(std::string_view path) {
    auto slash = path.find_last_of("/\\");
    std::string_view base = slash == std::string_view::npos ? path : path.substr(slash + 1);
    auto dot = base.rfind('.');
    if (dot == std::string_view::npos || dot == 0) return "";
    return to_lower_ascii(base.substr(dot));
}

inline std::string language_for_extension(const std::string& ext) {
    static const std::map<std::string, std::string> kMap = {
        {".py", "python"},     {".pyw", "python"},
        {".java", "java"},
        {".cs", "csharp"},
        {".cpp", "cpp"},       {".cc", "cpp"},   {".cxx", "cpp"},
        {".hpp", "cpp"},       {".hh", "cpp"},   {".hxx", "cpp"},
        {".c", "c"},           {".h", "c"},
        {".js", "javascript"}, {".mjs", "javascript"}, {".jsx", "javascript"},
        {".sql", "sql"},       {".html", "html"},      {".htm", "html"},
        {".xml", "xml"},       {".md", "markdown"},    {".txt", "text"},
    };
    auto it = kMap.find(ext);
    return it == kMap.end() ? "" : it->second;
}

// Keyword evidence per language, counted as substring hits.
inline std::map<std::string, std::size_t> keyword_votes(std::string_view content) {
    static const std::map<std::string, std::vector<std::string>> kMarkers = {
        {"python", {"def ", "import ", "self.", "elif ", "None", "print("}},
        {"javascript", {"function ", "const ", "=> ", "var ", "console.", "let "}},
        {"java", {"public class", "System.out", "import java", "extends ", "@Override"}},
        {"csharp", {"using System", "namespace ", "Console.", "public class", "string[]"}},
        {"cpp", {"#include", "std::", "template<", "namespace ", "nullptr"}},
        {"c", {"#include", "printf(", "struct ", "->", "void "}},
    };
    std::map<std::string, std::size_t> votes;
    for (const auto& [lang, markers] : kMarkers) {
        std::size_t hits = 0;
        for (const auto& marker : markers) {
            std::size_t pos = 0;
            while ((pos = content.find(marker, pos)) != std::string_view::npos) {
                ++hits;
                pos += marker.size();
            }
        }
        if (hits > 0) votes[lang] = hits;
    }
    return votes;
}

inline double english_stopword_share(std::string_view content) {
    static const std::set<std::string_view> kStopwords = {
        "the", "and", "of", "to", "in", "is", "a", "that", "for", "it",
        "with", "as", "on", "was", "are", "this", "be", "or", "an"};
    auto tokens = split_tokens(content);
    if (tokens.empty()) return 0.0;
    std::size_t hits = 0;
    for (auto tok : tokens) {
        std::string lowered = to_lower_ascii(tok);
        while (!lowered.empty() && !std::isalnum(static_cast<unsigned char>(lowered.back()))) {
            lowered.pop_back();
        }
        if (kStopwords.count(lowered)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(tokens.size());
}

}  // namespace detail

// Built-in fallback detector: extension mapping plus printable-ASCII ratio,
// with keyword votes arbitrating between candidate languages. Confidence
// drops when evidence for other languages dilutes the winner's share.
inline LanguageGuess identify_language(const DocumentRecord& rec) {
    if (rec.content.empty()) throw EmptyDocument("identify_language: empty content");
    const double printable = printable_ascii_ratio(rec.content);
    auto votes = detail::keyword_votes(rec.content);
    std::size_t total_votes = 0;
    for (const auto& [lang, n] : votes) total_votes += n;

    const std::string ext = detail::path_extension(rec.path);
    const std::string ext_lang = detail::language_for_extension(ext);
    if (!ext_lang.empty()) {
        double share = total_votes == 0
                           ? 1.0
                           : static_cast<double>(votes.count(ext_lang) ? votes[ext_lang] : 0) /
                                 static_cast<double>(total_votes);
        // Non-code extensions carry no keyword expectations.
        if (ext_lang == "text" || ext_lang == "markdown" || ext_lang == "html" ||
            ext_lang == "xml" || ext_lang == "sql") {
            share = 1.0;
        }
        return {ext_lang, printable * (0.75 + 0.25 * share)};
    }

    const double english = detail::english_stopword_share(rec.content);
    std::string best_lang;
    std::size_t best_votes = 0;
    for (const auto& [lang, n] : votes) {
        if (n > best_votes) {
            best_votes = n;
            best_lang = lang;
        }
    }
    if (best_votes > 0 &&
        static_cast<double>(best_votes) >= english * 10.0) {
        double share = static_cast<double>(best_votes) / static_cast<double>(total_votes);
        return {best_lang, printable * (0.5 + 0.5 * share)};
    }
    if (english > 0.05) {
        return {"english", printable * (0.6 + 0.4 * std::min(1.0, english / 0.15))};
    }
    return {"unknown", printable * 0.25};
}

inline const LanguageDetector& builtin_language_detector() {
    static const LanguageDetector kDetector = [](const DocumentRecord& rec) {
        return identify_language(rec);
    };
    return kDetector;
}

// Fraction of control bytes; UTF-8 continuation/lead bytes count as text.
// Validated records are UTF-8, so "binary" here means control-character
// soup rather than multibyte text.
inline double nonprintable_fraction(std::string_view content) {
    if (content.empty()) return 0.0;
    std::size_t bad = 0;
    for (unsigned char c : content) {
        bool printable = is_printable_ascii(c) || c >= 0x80;
        if (!printable) ++bad;
    }
    return static_cast<double>(bad) / static_cast<double>(content.size());
}

// Gate order: size, extension, binary content, language confidence. The
// first failing gate is the recorded reason. The extension gate only
// applies to records that carry a path.
inline GateDecision rule_filter(const DocumentRecord& rec, const RuleConfig& cfg) {
    if (rec.byte_len > cfg.max_bytes) return GateDecision::rejected("size");
    if (!cfg.allowed_extensions.empty() && !rec.path.empty()) {
        if (cfg.allowed_extensions.count(detail::path_extension(rec.path)) == 0) {
            return GateDecision::rejected("extension");
        }
    }
    if (nonprintable_fraction(rec.content) > cfg.binary_nonprintable_threshold) {
        return GateDecision::rejected("binary");
    }
    if (rec.language_confidence < cfg.min_language_confidence) {
        return GateDecision::rejected("language_confidence");
    }
    return GateDecision::kept();
}

// High/Medium/Low assignment over a corpus of signal vectors.
struct BucketThresholds {
    double high_percentile = 0.80;
    double low_percentile = 0.20;
    std::map<std::string, double> weights;  // empty = equal weight on all signals

    void validate() const {
        if (!(low_percentile > 0.0 && low_percentile < high_percentile && high_percentile < 1.0)) {
            throw ConfigError("bucket percentiles must satisfy 0 < low < high < 1");
        }
    }
};

// Weighted composite of min-max-normalized signals. Normalization bounds
// come from the input corpus, so the composite is invariant under positive
// affine transforms of any single signal. "external_score" is a valid
// weight name and reads the record-level classifier score.
inline std::vector<double> composite_scores(
    const std::vector<SignalVector>& signals,
    const std::vector<double>& external_scores,
    const BucketThresholds& th) {
    std::map<std::string, double> weights = th.weights;
    if (weights.empty()) {
        for (const auto& name : SignalVector::names()) weights[name] = 1.0;
    }
    std::vector<double> scores(signals.size(), 0.0);
    for (const auto& [name, weight] : weights) {
        std::vector<double> values(signals.size());
        for (std::size_t i = 0; i < signals.size(); ++i) {
            values[i] = name == "external_score"
                            ? (i < external_scores.size() ? external_scores[i] : 0.0)
                            : signals[i].get(name);
        }
        auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
        double lo = *lo_it, hi = *hi_it;
        for (std::size_t i = 0; i < signals.size(); ++i) {
            double normalized = hi > lo ? (values[i] - lo) / (hi - lo) : 0.0;
            scores[i] += weight * normalized;
        }
    }
    return scores;
}

// Quantile convention (fixed): with scores sorted ascending as s(1..n),
//   High  iff score > s(ceil(high_percentile * n))
//   Low   iff score < s(floor(low_percentile * n) + 1)
// An all-identical corpus therefore lands entirely in Medium, and a
// single-record corpus is Medium.
inline std::vector<QualityBucket> bucket_by_scores(const std::vector<double>& scores,
                                                   const BucketThresholds& th) {
    th.validate();
    if (scores.empty()) throw EmptyDocument("bucket_quality: no records");
    const std::size_t n = scores.size();
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    auto rank = [&](double p, bool low) -> std::size_t {
        if (low) {
            std::size_t r = static_cast<std::size_t>(std::floor(p * static_cast<double>(n))) + 1;
            return std::min(r, n);
        }
        std::size_t r = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
        return std::max<std::size_t>(1, std::min(r, n));
    };
    const double high_cut = sorted[rank(th.high_percentile, false) - 1];
    const double low_cut = sorted[rank(th.low_percentile, true) - 1];
    std::vector<QualityBucket> buckets(n, QualityBucket::Medium);
    for (std::size_t i = 0; i < n; ++i) {
        if (scores[i] > high_cut) buckets[i] = QualityBucket::High;
        else if (scores[i] < low_cut) buckets[i] = QualityBucket::Low;
    }
    return buckets;
}

inline std::vector<QualityBucket> bucket_quality(const std::vector<SignalVector>& signals,
                                                 const BucketThresholds& th,
                                                 const std::vector<double>& external_scores = {}) {
    return bucket_by_scores(composite_scores(signals, external_scores, th), th);
}

}  // namespace curate
