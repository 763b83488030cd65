// Test-side oracles, kept independent of the library implementations they
// check: separate tokenization, set arithmetic, and graph walking.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

inline std::vector<std::string> lower_tokens(const std::string& text) {
    std::string lowered;
    lowered.reserve(text.size());
    for (unsigned char c : text) {
        lowered.push_back(std::isspace(c) ? ' ' : static_cast<char>(std::tolower(c)));
    }
    std::istringstream stream(lowered);
    std::vector<std::string> tokens;
    std::string tok;
    while (stream >> tok) tokens.push_back(tok);
    return tokens;
}

// Token shingles as literal strings; documents shorter than k tokens give
// the single whole-document shingle.
inline std::set<std::string> token_shingles(const std::string& text, std::size_t k) {
    auto tokens = lower_tokens(text);
    std::set<std::string> out;
    if (tokens.empty()) return out;
    if (tokens.size() < k) {
        std::string whole;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i) whole += ' ';
            whole += tokens[i];
        }
        out.insert(whole);
        return out;
    }
    for (std::size_t i = 0; i + k <= tokens.size(); ++i) {
        std::string sh;
        for (std::size_t t = 0; t < k; ++t) {
            if (t) sh += ' ';
            sh += tokens[i + t];
        }
        out.insert(sh);
    }
    return out;
}

template <typename T>
double jaccard(const std::set<T>& a, const std::set<T>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& x : a) {
        if (b.count(x)) ++inter;
    }
    std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Normalized word n-grams: lowercase, whitespace split, drop tokens with no
// alphanumeric character; short texts give one whole-text gram.
inline std::set<std::string> word_ngrams(const std::string& text, std::size_t n) {
    auto raw = lower_tokens(text);
    std::vector<std::string> tokens;
    for (auto& t : raw) {
        bool has_alnum = false;
        for (unsigned char c : t) {
            if (std::isalnum(c)) has_alnum = true;
        }
        if (has_alnum) tokens.push_back(t);
    }
    std::set<std::string> grams;
    if (tokens.empty()) return grams;
    std::size_t len = std::min(tokens.size(), n);
    if (tokens.size() < n) len = tokens.size();
    for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
        std::string g;
        for (std::size_t t = 0; t < len; ++t) {
            if (t) g += ' ';
            g += tokens[i + t];
        }
        grams.insert(g);
        if (tokens.size() < n) break;
    }
    return grams;
}

// Every dependency edge must place the imported file before the importer.
inline bool topo_order_valid(const std::vector<std::string>& order,
                             const std::set<std::pair<std::string, std::string>>& edges) {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    for (const auto& [importer, imported] : edges) {
        auto pi = pos.find(importer);
        auto pd = pos.find(imported);
        if (pi == pos.end() || pd == pos.end()) return false;
        if (pd->second >= pi->second) return false;
    }
    return true;
}

// Recursive-DFS cycle detector over importer->imported edges.
inline bool has_cycle(const std::set<std::string>& nodes,
                      const std::set<std::pair<std::string, std::string>>& edges) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& [u, v] : edges) adj[u].push_back(v);
    std::map<std::string, int> state;  // 0 unseen, 1 on stack, 2 done
    std::vector<std::pair<std::string, std::size_t>> stack;
    for (const auto& start : nodes) {
        if (state[start] != 0) continue;
        stack.push_back({start, 0});
        state[start] = 1;
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            auto& targets = adj[node];
            if (next < targets.size()) {
                const std::string& t = targets[next++];
                if (state[t] == 1) return true;
                if (state[t] == 0) {
                    state[t] = 1;
                    stack.push_back({t, 0});
                }
            } else {
                state[node] = 2;
                stack.pop_back();
            }
        }
    }
    return false;
}

// LSH candidate probability for similarity s with b bands of r rows.
inline double lsh_curve(double s, std::size_t r, std::size_t b) {
    return 1.0 - std::pow(1.0 - std::pow(s, static_cast<double>(r)), static_cast<double>(b));
}

// Random valid UTF-8 documents mixing ASCII with 2-4 byte codepoints.
inline std::string random_utf8(std::mt19937_64& rng, std::size_t min_cp, std::size_t max_cp) {
    std::uniform_int_distribution<std::size_t> len_dist(min_cp, max_cp);
    std::uniform_int_distribution<int> class_dist(0, 9);
    std::uniform_int_distribution<std::uint32_t> ascii(0x20, 0x7e);
    std::uniform_int_distribution<std::uint32_t> latin(0xa0, 0x7ff);
    std::uniform_int_distribution<std::uint32_t> bmp(0x800, 0xffff);
    std::uniform_int_distribution<std::uint32_t> astral(0x10000, 0x10ffff);
    std::size_t n = len_dist(rng);
    std::string out;
    out.reserve(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        int cls = class_dist(rng);
        std::uint32_t cp;
        if (cls < 6) cp = ascii(rng);
        else if (cls < 8) cp = latin(rng);
        else if (cls < 9) {
            do {
                cp = bmp(rng);
            } while (cp >= 0xd800 && cp <= 0xdfff);
        } else {
            cp = astral(rng);
        }
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        } else {
            out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        }
    }
    return out;
}

}  // namespace oracle
