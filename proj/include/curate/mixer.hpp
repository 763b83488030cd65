#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "curate/error.hpp"
#include "curate/hash.hpp"
#include "curate/record.hpp"

namespace curate {

// Token-share weights across the three pre-training modalities. The
// finalized composition is 78:12:10 (code:text:math).
struct MixRatio {
    double code = 78.0;
    double text = 12.0;
    double math = 10.0;

    void validate() const {
        if (code < 0.0 || text < 0.0 || math < 0.0 || code + text + math <= 0.0) {
            throw ConfigError("mix.ratio weights must be non-negative and not all zero");
        }
    }

    double fraction(Modality m) const {
        double total = code + text + math;
        switch (m) {
            case Modality::Code: return code / total;
            case Modality::Text: return text / total;
            case Modality::Math: return math / total;
            default: return 0.0;
        }
    }
};

struct SelectedRecord {
    std::string id;
    std::uint64_t est_tokens = 0;
};

struct ModalityPlan {
    std::uint64_t target_tokens = 0;
    std::uint64_t selected_tokens = 0;
    std::vector<SelectedRecord> selected;  // in selection order
};

struct MixPlan {
    std::uint64_t budget_tokens = 0;
    std::map<Modality, ModalityPlan> per_modality;

    std::uint64_t selected_tokens() const {
        std::uint64_t total = 0;
        for (const auto& [m, plan] : per_modality) total += plan.selected_tokens;
        return total;
    }
};

// Integer apportionment of the budget by largest remainder: per-modality
// targets sum to the budget exactly.
inline std::map<Modality, std::uint64_t> apportion_budget(std::uint64_t budget,
                                                          const MixRatio& ratio) {
    ratio.validate();
    const Modality kModalities[] = {Modality::Code, Modality::Text, Modality::Math};
    std::map<Modality, std::uint64_t> targets;
    std::vector<std::pair<double, Modality>> remainders;
    std::uint64_t assigned = 0;
    for (Modality m : kModalities) {
        double exact = ratio.fraction(m) * static_cast<double>(budget);
        std::uint64_t floor_value = static_cast<std::uint64_t>(std::floor(exact));
        targets[m] = floor_value;
        assigned += floor_value;
        remainders.push_back({exact - static_cast<double>(floor_value), m});
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;  // stable tie-break: code, text, math
    });
    for (std::size_t i = 0; assigned < budget && i < remainders.size(); ++i, ++assigned) {
        ++targets[remainders[i].second];
    }
    return targets;
}

// Optional High/Medium/Low sampling weights. Records from heavier buckets
// sort earlier in the seeded selection order; uniform by default.
struct BucketWeights {
    double high = 1.0;
    double medium = 1.0;
    double low = 1.0;

    double weight(const std::optional<QualityBucket>& b) const {
        if (!b) return medium;
        switch (*b) {
            case QualityBucket::High: return high;
            case QualityBucket::Medium: return medium;
            case QualityBucket::Low: return low;
        }
        return medium;
    }

    bool uniform() const { return high == medium && medium == low; }
};

namespace detail {

// Seeded selection order for one pool. Uniform weights use a plain
// Fisher-Yates shuffle; non-uniform weights use weighted sampling without
// replacement via exponential keys (-log(u)/w ascending).
inline std::vector<std::size_t> selection_order(const std::vector<DocumentRecord>& pool,
                                                std::uint64_t seed,
                                                const BucketWeights& weights) {
    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (weights.uniform()) {
        seeded_shuffle(order, seed);
        return order;
    }
    std::vector<double> keys(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        Rng rng(mix64(seed, fnv1a64(pool[i].id)));
        double u = rng.next_unit();
        if (u <= 0.0) u = 0x1.0p-53;
        double w = std::max(1e-12, weights.weight(pool[i].quality_bucket));
        keys[i] = -std::log(u) / w;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (keys[a] != keys[b]) return keys[a] < keys[b];
        return pool[a].id < pool[b].id;
    });
    return order;
}

}  // namespace detail

// Greedy seeded selection per modality: walk the shuffled pool and take
// records until the target is reached or first crossed (the crossing
// record is kept). Instruction records are not part of the CPT mix.
inline MixPlan plan_mix(const std::map<Modality, std::vector<DocumentRecord>>& pools,
                        const MixRatio& ratio, std::uint64_t budget, std::uint64_t seed,
                        const BucketWeights& weights = {}) {
    auto targets = apportion_budget(budget, ratio);
    MixPlan plan;
    plan.budget_tokens = budget;
    for (const auto& [modality, target] : targets) {
        ModalityPlan mp;
        mp.target_tokens = target;
        const std::vector<DocumentRecord>* pool = nullptr;
        if (auto it = pools.find(modality); it != pools.end()) pool = &it->second;

        std::uint64_t available = 0;
        if (pool) {
            for (const auto& rec : *pool) available += rec.est_tokens;
        }
        if (available < target) {
            throw InsufficientPool("pool '" + std::string(to_string(modality)) +
                                   "' has " + std::to_string(available) + " tokens, needs " +
                                   std::to_string(target));
        }
        if (pool && target > 0) {
            auto order = detail::selection_order(*pool, mix64(seed, fnv1a64(to_string(modality))),
                                                 weights);
            for (std::size_t idx : order) {
                if (mp.selected_tokens >= target) break;
                const auto& rec = (*pool)[idx];
                mp.selected.push_back({rec.id, rec.est_tokens});
                mp.selected_tokens += rec.est_tokens;
            }
        }
        plan.per_modality[modality] = std::move(mp);
    }
    return plan;
}

// Seeded global shuffle of every selected id.
inline std::vector<std::string> interleave(const MixPlan& plan, std::uint64_t seed) {
    std::vector<std::string> ids;
    for (const auto& [modality, mp] : plan.per_modality) {
        for (const auto& sel : mp.selected) ids.push_back(sel.id);
    }
    seeded_shuffle(ids, mix64(seed, 0x696e746cULL));
    return ids;
}

// Repetition schedule: the same selection reshuffled per epoch under
// distinct derived seeds.
struct EpochPlan {
    std::size_t epochs = 3;
    std::vector<std::uint64_t> epoch_seeds;
};

inline EpochPlan plan_epochs(std::size_t epochs, std::uint64_t seed) {
    if (epochs < 1) throw ConfigError("mix.epochs must be >= 1");
    EpochPlan plan;
    plan.epochs = epochs;
    for (std::size_t e = 0; e < epochs; ++e) {
        plan.epoch_seeds.push_back(mix64(seed, 0xe70c5ULL + e));
    }
    return plan;
}

inline std::vector<std::vector<std::string>> epoch_orderings(const MixPlan& plan,
                                                             const EpochPlan& epochs) {
    std::vector<std::vector<std::string>> out;
    out.reserve(epochs.epochs);
    for (std::uint64_t es : epochs.epoch_seeds) {
        out.push_back(interleave(plan, es));
    }
    return out;
}

struct MixReportRow {
    Modality modality = Modality::Code;
    std::uint64_t target_tokens = 0;
    std::uint64_t selected_tokens = 0;
    std::size_t selected_records = 0;
    double realized_share = 0.0;
};

inline std::vector<MixReportRow> mix_report(const MixPlan& plan) {
    std::vector<MixReportRow> rows;
    const double total = static_cast<double>(plan.selected_tokens());
    for (const auto& [modality, mp] : plan.per_modality) {
        MixReportRow row;
        row.modality = modality;
        row.target_tokens = mp.target_tokens;
        row.selected_tokens = mp.selected_tokens;
        row.selected_records = mp.selected.size();
        row.realized_share = total == 0.0 ? 0.0 : static_cast<double>(mp.selected_tokens) / total;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace curate
