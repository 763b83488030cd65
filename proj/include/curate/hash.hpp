#pragma once

#include <cstdint>
#include <string_view>

namespace curate {

// splitmix64: the splittable seed expander. Every derived hash function and
// RNG in the pipeline bottoms out here, so results are identical across
// platforms and standard-library implementations.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// One-shot mix of two values into a fresh 64-bit key.
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    std::uint64_t state = a ^ 0x2545f4914f6cdd1dULL;
    state += splitmix64(state);
    state ^= b;
    return splitmix64(state);
}

// FNV-1a over bytes. Stable content fingerprint for strings.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Multiply-shift style universal hash: h(x) = a*x + b over 2^64 with odd a.
struct MulShiftHash {
    std::uint64_t a = 1;
    std::uint64_t b = 0;

    std::uint64_t operator()(std::uint64_t x) const { return a * x + b; }

    static MulShiftHash derive(std::uint64_t& seed_state) {
        MulShiftHash h;
        h.a = splitmix64(seed_state) | 1ULL;  // odd multiplier
        h.b = splitmix64(seed_state);
        return h;
    }
};

// Deterministic RNG. Thin counter-based wrapper over splitmix64; avoids
// std distributions, whose output is not pinned by the standard.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Unbiased integer in [0, bound). bound must be > 0.
    std::uint64_t next_below(std::uint64_t bound) {
        // Rejection sampling on the top of the range.
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit && limit != 0);
        return v % bound;
    }

    // Uniform double in [0, 1).
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// In-place Fisher-Yates shuffle with the deterministic RNG.
template <typename Vec>
void seeded_shuffle(Vec& items, std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

}  // namespace curate
