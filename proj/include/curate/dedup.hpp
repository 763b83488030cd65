#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "curate/error.hpp"
#include "curate/hash.hpp"
#include "curate/parallel.hpp"
#include "curate/record.hpp"
#include "curate/text.hpp"

namespace curate {

// MinHash-LSH parameters. Defaults: shingle size 5, 110 permutations split
// into 10 bands of 11 rows, acceptance threshold 0.75.
struct DedupParams {
    std::size_t shingle_k = 5;
    std::size_t num_perms = 110;
    std::size_t bands = 10;
    std::size_t rows = 11;
    double jaccard_threshold = 0.75;
    std::uint64_t seed = 0;

    void validate() const {
        if (shingle_k < 1) throw ConfigError("dedup.shingle_k must be >= 1");
        if (bands * rows != num_perms) {
            throw ConfigError("dedup.bands * dedup.rows must equal dedup.num_perms");
        }
        if (!(jaccard_threshold > 0.0 && jaccard_threshold <= 1.0)) {
            throw ConfigError("dedup.jaccard_threshold must be in (0,1]");
        }
    }
};

// A document's shingle set, stored as 64-bit fingerprints of the k-token
// windows. Tokens are whitespace-delimited after lowercasing and
// whitespace collapse; documents shorter than k tokens contribute their
// whole text as a single shingle.
using ShingleSet = std::vector<std::uint64_t>;  // sorted, unique

inline ShingleSet shingle(std::string_view content, std::size_t k) {
    std::string normalized = normalize_whitespace_lower(content);
    if (normalized.empty()) throw EmptyDocument("shingle: empty after normalization");
    auto tokens = split_tokens(normalized);
    ShingleSet out;
    if (tokens.size() < k) {
        out.push_back(fnv1a64(normalized));
        return out;
    }
    out.reserve(tokens.size() - k + 1);
    std::string window;
    for (std::size_t i = 0; i + k <= tokens.size(); ++i) {
        window.clear();
        for (std::size_t t = 0; t < k; ++t) {
            if (t) window.push_back(' ');
            window.append(tokens[i + t]);
        }
        out.push_back(fnv1a64(window));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct MinHashSignature {
    std::vector<std::uint64_t> values;  // length num_perms
};

// The permutation family: num_perms multiply-shift functions expanded from
// the seed. Shared across every signature in one run.
class MinHasher {
public:
    explicit MinHasher(const DedupParams& params) : params_(params) {
        params.validate();
        std::uint64_t state = params.seed ^ 0x5851f42d4c957f2dULL;
        perms_.reserve(params.num_perms);
        for (std::size_t i = 0; i < params.num_perms; ++i) {
            perms_.push_back(MulShiftHash::derive(state));
        }
    }

    MinHashSignature signature(const ShingleSet& shingles) const {
        if (shingles.empty()) throw EmptyShingleSet("minhash: empty shingle set");
        MinHashSignature sig;
        sig.values.assign(perms_.size(), ~std::uint64_t{0});
        for (std::uint64_t sh : shingles) {
            for (std::size_t i = 0; i < perms_.size(); ++i) {
                std::uint64_t h = perms_[i](sh);
                if (h < sig.values[i]) sig.values[i] = h;
            }
        }
        return sig;
    }

    const DedupParams& params() const { return params_; }

private:
    DedupParams params_;
    std::vector<MulShiftHash> perms_;
};

// Fraction of agreeing coordinates: an unbiased estimate of the Jaccard
// similarity of the underlying shingle sets.
inline double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.values.size() != b.values.size()) {
        throw SignatureMismatch("signatures have different lengths");
    }
    if (a.values.empty()) throw SignatureMismatch("empty signatures");
    std::size_t agree = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (a.values[i] == b.values[i]) ++agree;
    }
    return static_cast<double>(agree) / static_cast<double>(a.values.size());
}

// Banded LSH: a pair becomes a candidate iff some band (contiguous
// rows-length slice) hashes identically in both signatures.
inline std::vector<std::pair<std::size_t, std::size_t>> lsh_candidates(
    const std::vector<MinHashSignature>& signatures, const DedupParams& params) {
    params.validate();
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t band = 0; band < params.bands; ++band) {
        std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
        const std::size_t offset = band * params.rows;
        for (std::size_t i = 0; i < signatures.size(); ++i) {
            const auto& values = signatures[i].values;
            std::uint64_t key = mix64(params.seed, band);
            for (std::size_t r = 0; r < params.rows; ++r) {
                key = mix64(key, values[offset + r]);
            }
            buckets[key].push_back(i);
        }
        for (const auto& [key, members] : buckets) {
            for (std::size_t x = 0; x < members.size(); ++x) {
                for (std::size_t y = x + 1; y < members.size(); ++y) {
                    pairs.emplace(members[x], members[y]);
                }
            }
        }
    }
    return {pairs.begin(), pairs.end()};
}

// Union-find keyed by dense indices.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

// One group of mutual duplicates. The representative is the
// lexicographically smallest member id and is the record kept.
struct DupCluster {
    std::string representative;
    std::set<std::string> members;
};

struct DedupResult {
    std::vector<DocumentRecord> survivors;
    std::vector<DupCluster> clusters;  // only clusters with >= 2 members
};

// Hook for embedding-based near-duplicate scoring. No model ships in-repo:
// any scorer mapping two contents to a similarity in [0,1] plugs in here
// and is consulted for LSH candidate pairs that fail the MinHash estimate.
// Pairs that never collide in a band are not scored.
struct SemanticScorer {
    std::function<double(std::string_view, std::string_view)> score;
    double threshold = 1.0;

    bool enabled() const { return static_cast<bool>(score); }
};

// Exact pass (content hash verified by byte comparison), then MinHash-LSH
// candidates accepted at estimated Jaccard >= threshold and joined by
// union-find. Candidate order is normalized before the union step, so the
// clustering is independent of worker count.
inline DedupResult dedup_corpus(const std::vector<DocumentRecord>& records,
                                const DedupParams& params,
                                const SemanticScorer& semantic = {}) {
    params.validate();
    const std::size_t n = records.size();
    UnionFind uf(n);

    // Exact duplicates: bucket by content hash, verify bytes within buckets.
    {
        std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_hash;
        for (std::size_t i = 0; i < n; ++i) {
            by_hash[fnv1a64(records[i].content)].push_back(i);
        }
        for (const auto& [h, members] : by_hash) {
            for (std::size_t x = 0; x < members.size(); ++x) {
                for (std::size_t y = x + 1; y < members.size(); ++y) {
                    if (records[members[x]].content == records[members[y]].content) {
                        uf.unite(members[x], members[y]);
                    }
                }
            }
        }
    }

    // Fuzzy pass over exact-unique contents only: one delegate per exact
    // group keeps the LSH index small and the result unchanged.
    std::vector<std::size_t> delegates;
    for (std::size_t i = 0; i < n; ++i) {
        if (uf.find(i) == i) delegates.push_back(i);
    }

    MinHasher hasher(params);
    std::vector<MinHashSignature> signatures(delegates.size());
    parallel_for(delegates.size(), [&](std::size_t d) {
        signatures[d] = hasher.signature(shingle(records[delegates[d]].content, params.shingle_k));
    });

    auto candidates = lsh_candidates(signatures, params);
    std::sort(candidates.begin(), candidates.end());
    for (const auto& [x, y] : candidates) {
        bool duplicate =
            estimate_jaccard(signatures[x], signatures[y]) >= params.jaccard_threshold;
        if (!duplicate && semantic.enabled()) {
            duplicate = semantic.score(records[delegates[x]].content,
                                       records[delegates[y]].content) >= semantic.threshold;
        }
        if (duplicate) uf.unite(delegates[x], delegates[y]);
    }

    // Collect clusters; keep the lexicographically smallest id per cluster.
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[uf.find(i)].push_back(i);

    DedupResult result;
    std::vector<bool> keep(n, false);
    for (const auto& [root, members] : groups) {
        std::size_t best = members.front();
        for (std::size_t m : members) {
            if (records[m].id < records[best].id) best = m;
        }
        keep[best] = true;
        if (members.size() >= 2) {
            DupCluster cluster;
            cluster.representative = records[best].id;
            for (std::size_t m : members) cluster.members.insert(records[m].id);
            result.clusters.push_back(std::move(cluster));
        }
    }
    std::sort(result.clusters.begin(), result.clusters.end(),
              [](const DupCluster& a, const DupCluster& b) {
                  return a.representative < b.representative;
              });

    for (std::size_t i = 0; i < n; ++i) {
        if (!keep[i]) continue;
        result.survivors.push_back(records[i]);
    }
    return result;
}

// Reject reason for a removed duplicate: exact when byte-identical to the
// kept representative, near otherwise.
inline std::string duplicate_reason(const DocumentRecord& removed,
                                    const DocumentRecord& representative) {
    return removed.content == representative.content ? "dedup:exact" : "dedup:near";
}

// URL-based cross-source overlap removal. A pattern containing "://" is a
// URL prefix; anything else matches the host exactly or as a dot-suffix.
// Empty origin_url never matches.
class UrlBlocklist {
public:
    explicit UrlBlocklist(const std::vector<std::string>& patterns) {
        for (const auto& raw : patterns) {
            std::string p = std::string(trim(raw));
            if (p.empty() || p.find_first_of(" \t") != std::string::npos) {
                throw ConfigError("malformed URL pattern: '" + raw + "'");
            }
            if (p.find("://") != std::string::npos) {
                prefixes_.push_back(to_lower_ascii(p));
            } else {
                hosts_.insert(to_lower_ascii(p));
            }
        }
    }

    static std::string host_of(std::string_view url) {
        auto scheme = url.find("://");
        std::string_view rest = scheme == std::string_view::npos ? url : url.substr(scheme + 3);
        auto slash = rest.find_first_of("/?#");
        std::string_view host = slash == std::string_view::npos ? rest : rest.substr(0, slash);
        auto at = host.rfind('@');
        if (at != std::string_view::npos) host = host.substr(at + 1);
        auto colon = host.find(':');
        if (colon != std::string_view::npos) host = host.substr(0, colon);
        return to_lower_ascii(host);
    }

    bool blocked(std::string_view origin_url) const {
        if (origin_url.empty()) return false;
        std::string lowered = to_lower_ascii(origin_url);
        for (const auto& prefix : prefixes_) {
            if (starts_with(lowered, prefix)) return true;
        }
        std::string host = host_of(lowered);
        if (host.empty()) return false;
        if (hosts_.count(host)) return true;
        for (const auto& blocked_host : hosts_) {
            if (host.size() > blocked_host.size() &&
                ends_with(host, "." + blocked_host)) {
                return true;
            }
        }
        return false;
    }

private:
    std::set<std::string> hosts_;
    std::vector<std::string> prefixes_;
};

inline GateDecision url_overlap_filter(const DocumentRecord& rec, const UrlBlocklist& blocklist) {
    if (blocklist.blocked(rec.origin_url)) return GateDecision::rejected("url_overlap");
    return GateDecision::kept();
}

}  // namespace curate
