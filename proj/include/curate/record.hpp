#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "curate/error.hpp"
#include "curate/text.hpp"

namespace curate {

enum class Modality { Code, Text, Math, Instruction };

inline const char* to_string(Modality m) {
    switch (m) {
        case Modality::Code: return "code";
        case Modality::Text: return "text";
        case Modality::Math: return "math";
        case Modality::Instruction: return "instruction";
    }
    return "code";
}

inline std::optional<Modality> modality_from_string(std::string_view s) {
    if (s == "code") return Modality::Code;
    if (s == "text") return Modality::Text;
    if (s == "math") return Modality::Math;
    if (s == "instruction") return Modality::Instruction;
    return std::nullopt;
}

enum class QualityBucket { High, Medium, Low };

inline const char* to_string(QualityBucket b) {
    switch (b) {
        case QualityBucket::High: return "High";
        case QualityBucket::Medium: return "Medium";
        case QualityBucket::Low: return "Low";
    }
    return "Medium";
}

inline std::optional<QualityBucket> bucket_from_string(std::string_view s) {
    if (s == "High") return QualityBucket::High;
    if (s == "Medium") return QualityBucket::Medium;
    if (s == "Low") return QualityBucket::Low;
    return std::nullopt;
}

// Structural and documentation quality statistics for one document.
// Bounded fields stay in [0,1] on any input; all fields are finite.
struct SignalVector {
    double alnum_ratio = 0.0;
    double quoted_fraction = 0.0;
    double encoded_data_pct = 0.0;
    double duplicate_gram_fraction = 0.0;
    double lines_per_function = 0.0;
    double whitespace_ratio = 0.0;
    double printy_stmt_pct = 0.0;
    double char_token_ratio = 1.0;
    double comment_code_ratio = 0.0;
    double docstring_density = 0.0;
    double inline_explanation_freq = 0.0;

    // Signal names usable as bucket weights, in a fixed order.
    static const std::vector<std::string>& names() {
        static const std::vector<std::string> kNames = {
            "alnum_ratio",        "quoted_fraction",     "encoded_data_pct",
            "duplicate_gram_fraction", "lines_per_function", "whitespace_ratio",
            "printy_stmt_pct",    "char_token_ratio",    "comment_code_ratio",
            "docstring_density",  "inline_explanation_freq",
        };
        return kNames;
    }

    double get(std::string_view name) const {
        if (name == "alnum_ratio") return alnum_ratio;
        if (name == "quoted_fraction") return quoted_fraction;
        if (name == "encoded_data_pct") return encoded_data_pct;
        if (name == "duplicate_gram_fraction") return duplicate_gram_fraction;
        if (name == "lines_per_function") return lines_per_function;
        if (name == "whitespace_ratio") return whitespace_ratio;
        if (name == "printy_stmt_pct") return printy_stmt_pct;
        if (name == "char_token_ratio") return char_token_ratio;
        if (name == "comment_code_ratio") return comment_code_ratio;
        if (name == "docstring_density") return docstring_density;
        if (name == "inline_explanation_freq") return inline_explanation_freq;
        throw ConfigError("unknown signal name: " + std::string(name));
    }

    void set(std::string_view name, double value) {
        if (name == "alnum_ratio") alnum_ratio = value;
        else if (name == "quoted_fraction") quoted_fraction = value;
        else if (name == "encoded_data_pct") encoded_data_pct = value;
        else if (name == "duplicate_gram_fraction") duplicate_gram_fraction = value;
        else if (name == "lines_per_function") lines_per_function = value;
        else if (name == "whitespace_ratio") whitespace_ratio = value;
        else if (name == "printy_stmt_pct") printy_stmt_pct = value;
        else if (name == "char_token_ratio") char_token_ratio = value;
        else if (name == "comment_code_ratio") comment_code_ratio = value;
        else if (name == "docstring_density") docstring_density = value;
        else if (name == "inline_explanation_freq") inline_explanation_freq = value;
        else throw ConfigError("unknown signal name: " + std::string(name));
    }
};

// One source document moving through the pipeline. The unit every stage
// reads, transforms, flags, or drops.
struct DocumentRecord {
    std::string id;
    std::string source_name;
    Modality modality = Modality::Code;
    std::string path;     // repository-relative, empty for non-repo data
    std::string repo_id;  // empty for non-repo data
    std::string language = "unknown";
    double language_confidence = 0.0;
    std::string license = "unknown";
    std::string origin_url;
    std::string content;
    std::uint64_t byte_len = 0;
    std::uint64_t est_tokens = 0;
    std::optional<SignalVector> signals;
    std::optional<double> external_score;
    std::optional<QualityBucket> quality_bucket;
    std::set<std::string> flags;
};

// Token counting hook. The default estimator is ceil(byte_len / 4); swap in
// a real tokenizer by passing a different estimator where one is accepted.
using TokenEstimator = std::function<std::uint64_t(std::string_view)>;

inline std::uint64_t default_token_estimate(std::string_view content) {
    return (content.size() + 3) / 4;
}

inline const TokenEstimator& default_token_estimator() {
    static const TokenEstimator kEstimator = [](std::string_view c) {
        return default_token_estimate(c);
    };
    return kEstimator;
}

// Checks all record invariants, recomputing byte_len from content and
// filling est_tokens when absent (est_tokens == 0 means "not supplied").
inline DocumentRecord validate_record(DocumentRecord rec,
                                      const TokenEstimator& estimate = default_token_estimator()) {
    if (rec.id.empty()) throw MalformedRecord("record has no id");
    if (rec.content.empty()) throw MalformedRecord("record '" + rec.id + "' has no content");
    if (!is_valid_utf8(rec.content)) {
        throw EncodingError("record '" + rec.id + "' content is not valid UTF-8");
    }
    if (!(rec.language_confidence >= 0.0 && rec.language_confidence <= 1.0)) {
        throw MalformedRecord("record '" + rec.id + "' language_confidence out of [0,1]");
    }
    if (rec.external_score &&
        !(*rec.external_score >= 0.0 && *rec.external_score <= 1.0)) {
        throw MalformedRecord("record '" + rec.id + "' external_score out of [0,1]");
    }
    if (rec.quality_bucket && !rec.signals) {
        throw MalformedRecord("record '" + rec.id + "' has quality_bucket without signals");
    }
    if (rec.language.empty()) rec.language = "unknown";
    if (rec.license.empty()) rec.license = "unknown";
    rec.byte_len = rec.content.size();
    if (rec.est_tokens == 0) rec.est_tokens = estimate(rec.content);
    return rec;
}

// License and source gate applied before any content-based stage.
// A record failing any rule is rejected.
struct ProvenanceRule {
    std::set<std::string> allowed_licenses;
    std::set<std::string> blocked_sources;
    bool require_known_license = true;
};

// Keep/reject outcome of a gate. Rejection is a value, not an error; the
// reason becomes a stage flag on the rejected record.
struct GateDecision {
    bool keep = true;
    std::string reason;  // empty when kept

    static GateDecision kept() { return {true, ""}; }
    static GateDecision rejected(std::string why) { return {false, std::move(why)}; }
};

// Rejects iff the source is blocked, or (when require_known_license) the
// license is outside the allowlist. An empty allowlist admits any known
// license; "unknown" never passes a required-license check.
inline GateDecision provenance_gate(const DocumentRecord& rec, const ProvenanceRule& rule) {
    if (rule.blocked_sources.count(rec.source_name) > 0) {
        return GateDecision::rejected("provenance");
    }
    if (rule.require_known_license) {
        bool license_known = rec.license != "unknown" && !rec.license.empty();
        bool allowed = license_known &&
                       (rule.allowed_licenses.empty() || rule.allowed_licenses.count(rec.license) > 0);
        if (!allowed) return GateDecision::rejected("license");
    }
    return GateDecision::kept();
}

// Per-stage record and token accounting.
struct StageStats {
    std::string stage_name;
    std::uint64_t records_in = 0;
    std::uint64_t records_out = 0;
    std::uint64_t tokens_in = 0;
    std::uint64_t tokens_out = 0;
    std::map<std::string, std::uint64_t> rejections;  // reason -> count

    void merge(const StageStats& other) {
        records_in += other.records_in;
        records_out += other.records_out;
        tokens_in += other.tokens_in;
        tokens_out += other.tokens_out;
        for (const auto& [reason, count] : other.rejections) rejections[reason] += count;
    }
};

struct RetentionRow {
    std::string stage_name;
    std::uint64_t records_in = 0;
    std::uint64_t records_out = 0;
    std::uint64_t tokens_in = 0;
    std::uint64_t tokens_out = 0;
    double stage_record_retention = 1.0;      // records_out / records_in
    double stage_token_retention = 1.0;       // tokens_out / tokens_in
    double cumulative_record_retention = 1.0; // records_out / first stage records_in
    double cumulative_token_retention = 1.0;  // tokens_out / first stage tokens_in
};

struct RetentionReport {
    std::vector<RetentionRow> rows;
    // Exact finals: last stage output over first stage input.
    double cumulative_record_retention = 1.0;
    double cumulative_token_retention = 1.0;
};

// Builds the retention table for stages in pipeline order. Cumulative
// values are computed directly as final-out over first-in, never as a
// floating product of per-stage ratios.
inline RetentionReport retention_report(const std::vector<StageStats>& stats) {
    if (stats.empty()) throw EmptyPipeline("no stages to report");
    if (stats.front().records_in == 0) throw EmptyPipeline("first stage saw no records");
    RetentionReport report;
    const double first_records = static_cast<double>(stats.front().records_in);
    const double first_tokens = static_cast<double>(stats.front().tokens_in);
    for (const auto& st : stats) {
        RetentionRow row;
        row.stage_name = st.stage_name;
        row.records_in = st.records_in;
        row.records_out = st.records_out;
        row.tokens_in = st.tokens_in;
        row.tokens_out = st.tokens_out;
        row.stage_record_retention =
            st.records_in == 0 ? 0.0
                               : static_cast<double>(st.records_out) / static_cast<double>(st.records_in);
        row.stage_token_retention =
            st.tokens_in == 0 ? 0.0
                              : static_cast<double>(st.tokens_out) / static_cast<double>(st.tokens_in);
        row.cumulative_record_retention = static_cast<double>(st.records_out) / first_records;
        row.cumulative_token_retention =
            first_tokens == 0.0 ? 0.0 : static_cast<double>(st.tokens_out) / first_tokens;
        report.rows.push_back(row);
    }
    report.cumulative_record_retention = report.rows.back().cumulative_record_retention;
    report.cumulative_token_retention = report.rows.back().cumulative_token_retention;
    return report;
}

}  // namespace curate
