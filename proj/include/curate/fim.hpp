#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "curate/error.hpp"
#include "curate/hash.hpp"
#include "curate/record.hpp"
#include "curate/text.hpp"

namespace curate {

// Fill-in-the-middle rewrite parameters. Rate 0.25 selects a quarter of
// eligible documents; sentinels are configurable spellings so the output
// stays tokenizer-agnostic.
struct FimParams {
    double rate = 0.25;
    std::string sentinel_prefix = "<fim_prefix>";
    std::string sentinel_suffix = "<fim_suffix>";
    std::string sentinel_middle = "<fim_middle>";
    enum class Mode { PSM, SPM } mode = Mode::PSM;
    std::uint64_t seed = 0;
    std::size_t min_chars = 3;

    void validate() const {
        if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("fim.rate must be in [0,1]");
        if (sentinel_prefix.empty() || sentinel_suffix.empty() || sentinel_middle.empty() ||
            sentinel_prefix == sentinel_suffix || sentinel_prefix == sentinel_middle ||
            sentinel_suffix == sentinel_middle) {
            throw ConfigError("fim sentinels must be non-empty and pairwise distinct");
        }
        if (min_chars < 1) throw ConfigError("fim.min_chars must be >= 1");
    }
};

// Character-offset cut points: prefix = [0,i), middle = [i,j), suffix = [j,end).
struct CutPoints {
    std::size_t i = 0;
    std::size_t j = 0;
};

// Draws two uniform character offsets and orders them, seeded per document.
// Offsets index codepoints, so cuts always land on UTF-8 boundaries.
inline CutPoints split_document(std::string_view content, std::uint64_t seed,
                                std::size_t min_chars = 3) {
    const std::size_t length = utf8_length(content);
    if (length < min_chars) {
        throw NotTransformable("document shorter than fim.min_chars");
    }
    Rng rng(seed);
    std::size_t a = static_cast<std::size_t>(rng.next_below(length + 1));
    std::size_t b = static_cast<std::size_t>(rng.next_below(length + 1));
    return {std::min(a, b), std::max(a, b)};
}

// PSM: <pre> prefix <suf> suffix <mid> middle
// SPM: <pre> <suf> suffix <mid> prefix middle
inline std::string apply_fim(std::string_view content, CutPoints cuts, const FimParams& p) {
    p.validate();
    if (content.find(p.sentinel_prefix) != std::string_view::npos ||
        content.find(p.sentinel_suffix) != std::string_view::npos ||
        content.find(p.sentinel_middle) != std::string_view::npos) {
        throw SentinelCollision("content contains a sentinel literal");
    }
    auto bounds = utf8_boundaries(content);
    const std::size_t length = bounds.size() - 1;
    if (cuts.i > cuts.j || cuts.j > length) throw MalformedFim("cut points out of range");
    std::string_view prefix = content.substr(0, bounds[cuts.i]);
    std::string_view middle = content.substr(bounds[cuts.i], bounds[cuts.j] - bounds[cuts.i]);
    std::string_view suffix = content.substr(bounds[cuts.j]);
    std::string out;
    out.reserve(content.size() + p.sentinel_prefix.size() + p.sentinel_suffix.size() +
                p.sentinel_middle.size());
    if (p.mode == FimParams::Mode::PSM) {
        out += p.sentinel_prefix;
        out += prefix;
        out += p.sentinel_suffix;
        out += suffix;
        out += p.sentinel_middle;
        out += middle;
    } else {
        out += p.sentinel_prefix;
        out += p.sentinel_suffix;
        out += suffix;
        out += p.sentinel_middle;
        out += prefix;
        out += middle;
    }
    return out;
}

// Reassembles the original document from a rewritten one. For PSM the
// three segments are delimited; for SPM the trailing prefix+middle block
// is restored in front of the suffix as one piece.
inline std::string invert_fim(std::string_view rewritten, const FimParams& p) {
    p.validate();
    if (!starts_with(rewritten, p.sentinel_prefix)) {
        throw MalformedFim("rewritten text does not start with the prefix sentinel");
    }
    std::string_view rest = rewritten.substr(p.sentinel_prefix.size());
    if (p.mode == FimParams::Mode::PSM) {
        auto suf = rest.find(p.sentinel_suffix);
        if (suf == std::string_view::npos) throw MalformedFim("missing suffix sentinel");
        std::string_view prefix = rest.substr(0, suf);
        std::string_view tail = rest.substr(suf + p.sentinel_suffix.size());
        auto mid = tail.find(p.sentinel_middle);
        if (mid == std::string_view::npos) throw MalformedFim("missing middle sentinel");
        std::string_view suffix = tail.substr(0, mid);
        std::string_view middle = tail.substr(mid + p.sentinel_middle.size());
        if (prefix.find(p.sentinel_middle) != std::string_view::npos ||
            middle.find(p.sentinel_suffix) != std::string_view::npos ||
            middle.find(p.sentinel_prefix) != std::string_view::npos) {
            throw MalformedFim("misordered sentinels");
        }
        std::string out;
        out.reserve(prefix.size() + middle.size() + suffix.size());
        out += prefix;
        out += middle;
        out += suffix;
        return out;
    }
    if (!starts_with(rest, p.sentinel_suffix)) {
        throw MalformedFim("SPM layout requires the suffix sentinel immediately after the prefix");
    }
    std::string_view tail = rest.substr(p.sentinel_suffix.size());
    auto mid = tail.find(p.sentinel_middle);
    if (mid == std::string_view::npos) throw MalformedFim("missing middle sentinel");
    std::string_view suffix = tail.substr(0, mid);
    std::string_view prefix_middle = tail.substr(mid + p.sentinel_middle.size());
    if (prefix_middle.find(p.sentinel_prefix) != std::string_view::npos ||
        prefix_middle.find(p.sentinel_suffix) != std::string_view::npos) {
        throw MalformedFim("misordered sentinels");
    }
    std::string out;
    out.reserve(prefix_middle.size() + suffix.size());
    out += prefix_middle;
    out += suffix;
    return out;
}

// Per-record Bernoulli selection keyed by (seed, id): the transformed set
// is a pure function of params and ids, independent of record order.
inline bool fim_selected(const FimParams& p, std::string_view id) {
    Rng rng(mix64(p.seed, fnv1a64(id)));
    return rng.next_unit() < p.rate;
}

inline std::uint64_t fim_document_seed(const FimParams& p, std::string_view id) {
    return mix64(mix64(p.seed, 0x66696d5fULL), fnv1a64(id));
}

struct FimOutcome {
    enum class Kind { Transformed, Skipped, TooShort, Collision } kind = Kind::Skipped;
    CutPoints cuts;
};

// Applies FIM to roughly rate * |records| of the stream. Ineligible
// documents (too short, sentinel collision) pass through flagged.
inline FimOutcome transform_record(DocumentRecord& rec, const FimParams& p,
                                   const TokenEstimator& estimate = default_token_estimator()) {
    p.validate();
    if (!fim_selected(p, rec.id)) return {FimOutcome::Kind::Skipped, {}};
    CutPoints cuts;
    try {
        cuts = split_document(rec.content, fim_document_seed(p, rec.id), p.min_chars);
    } catch (const NotTransformable&) {
        rec.flags.insert("fim:too_short");
        return {FimOutcome::Kind::TooShort, {}};
    }
    std::string rewritten;
    try {
        rewritten = apply_fim(rec.content, cuts, p);
    } catch (const SentinelCollision&) {
        rec.flags.insert("fim:sentinel_collision");
        return {FimOutcome::Kind::Collision, {}};
    }
    rec.content = std::move(rewritten);
    rec.byte_len = rec.content.size();
    rec.est_tokens = estimate(rec.content);
    rec.flags.insert(p.mode == FimParams::Mode::PSM ? "fim:psm" : "fim:spm");
    return {FimOutcome::Kind::Transformed, cuts};
}

}  // namespace curate
