#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "curate/dedup.hpp"
#include "curate/decontam.hpp"
#include "curate/error.hpp"
#include "curate/filters.hpp"
#include "curate/fim.hpp"
#include "curate/mixer.hpp"
#include "curate/text.hpp"

namespace curate {

// Flat dotted-key configuration: one `key = value` per line, `#` comments,
// comma-separated lists. Command line --set overrides land in the same map.
class Config {
public:
    Config() = default;

    static Config from_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path.string());
        std::stringstream buffer;
        buffer << in.rdbuf();
        return from_string(buffer.str());
    }

    static Config from_string(const std::string& text) {
        Config cfg;
        std::size_t line_no = 0;
        for (auto line : split_lines(text)) {
            ++line_no;
            std::string_view t = trim(line);
            if (t.empty() || t.front() == '#') continue;
            auto eq = t.find('=');
            if (eq == std::string_view::npos) {
                throw ConfigError("config line " + std::to_string(line_no) + " has no '='");
            }
            std::string key(trim(t.substr(0, eq)));
            std::string value(trim(t.substr(eq + 1)));
            if (key.empty()) {
                throw ConfigError("config line " + std::to_string(line_no) + " has an empty key");
            }
            cfg.values_[key] = value;
        }
        return cfg;
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback = "") const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "' is not a number: " + it->second);
        }
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            unsigned long long v = std::stoull(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "' is not an integer: " + it->second);
        }
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
        if (it->second == "false" || it->second == "0" || it->second == "no") return false;
        throw ConfigError("config key '" + key + "' is not a boolean: " + it->second);
    }

    std::vector<std::string> get_list(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) return {};
        std::vector<std::string> out;
        std::string_view s = it->second;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= s.size(); ++i) {
            if (i == s.size() || s[i] == ',') {
                std::string item(trim(s.substr(start, i - start)));
                if (!item.empty()) out.push_back(std::move(item));
                start = i + 1;
            }
        }
        return out;
    }

    // All keys sharing a dotted prefix, with the prefix removed.
    std::map<std::string, std::string> section(const std::string& prefix) const {
        std::map<std::string, std::string> out;
        const std::string dotted = prefix + ".";
        for (const auto& [key, value] : values_) {
            if (starts_with(key, dotted)) out[key.substr(dotted.size())] = value;
        }
        return out;
    }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

inline ProvenanceRule provenance_rule_from(const Config& cfg) {
    ProvenanceRule rule;
    for (const auto& lic : cfg.get_list("provenance.allowed_licenses")) {
        rule.allowed_licenses.insert(lic);
    }
    for (const auto& src : cfg.get_list("provenance.blocked_sources")) {
        rule.blocked_sources.insert(src);
    }
    rule.require_known_license = cfg.get_bool("provenance.require_known_license", true);
    return rule;
}

inline RuleConfig rule_config_from(const Config& cfg) {
    RuleConfig rc;
    rc.max_bytes = cfg.get_u64("filters.max_bytes", rc.max_bytes);
    for (const auto& ext : cfg.get_list("filters.allowed_extensions")) {
        rc.allowed_extensions.insert(to_lower_ascii(ext));
    }
    rc.min_language_confidence =
        cfg.get_double("filters.min_language_confidence", rc.min_language_confidence);
    rc.binary_nonprintable_threshold =
        cfg.get_double("filters.binary_nonprintable_threshold", rc.binary_nonprintable_threshold);
    rc.validate();
    return rc;
}

inline BucketThresholds bucket_thresholds_from(const Config& cfg) {
    BucketThresholds th;
    th.high_percentile = cfg.get_double("buckets.high_percentile", th.high_percentile);
    th.low_percentile = cfg.get_double("buckets.low_percentile", th.low_percentile);
    for (const auto& [name, value] : cfg.section("buckets.weights")) {
        th.weights[name] = cfg.get_double("buckets.weights." + name, 0.0);
        (void)value;
    }
    th.validate();
    return th;
}

inline DedupParams dedup_params_from(const Config& cfg) {
    DedupParams p;
    p.shingle_k = cfg.get_u64("dedup.shingle_k", p.shingle_k);
    p.num_perms = cfg.get_u64("dedup.num_perms", p.num_perms);
    p.bands = cfg.get_u64("dedup.bands", p.bands);
    p.rows = cfg.get_u64("dedup.rows", p.rows);
    p.jaccard_threshold = cfg.get_double("dedup.jaccard_threshold", p.jaccard_threshold);
    p.seed = cfg.get_u64("dedup.seed", cfg.get_u64("pipeline.seed", 0));
    p.validate();
    return p;
}

inline DecontamParams decontam_params_from(const Config& cfg) {
    DecontamParams p;
    p.ngram_n = cfg.get_u64("decontam.ngram_n", p.ngram_n);
    p.fuzzy_jaccard = cfg.get_double("decontam.fuzzy_jaccard", p.fuzzy_jaccard);
    p.min_hits = cfg.get_u64("decontam.min_hits", p.min_hits);
    p.validate();
    return p;
}

inline FimParams fim_params_from(const Config& cfg) {
    FimParams p;
    p.rate = cfg.get_double("fim.rate", p.rate);
    p.sentinel_prefix = cfg.get_string("fim.sentinels.prefix", p.sentinel_prefix);
    p.sentinel_suffix = cfg.get_string("fim.sentinels.suffix", p.sentinel_suffix);
    p.sentinel_middle = cfg.get_string("fim.sentinels.middle", p.sentinel_middle);
    std::string mode = cfg.get_string("fim.mode", "psm");
    if (mode == "psm" || mode == "PSM") p.mode = FimParams::Mode::PSM;
    else if (mode == "spm" || mode == "SPM") p.mode = FimParams::Mode::SPM;
    else throw ConfigError("fim.mode must be psm or spm: " + mode);
    p.seed = cfg.get_u64("fim.seed", cfg.get_u64("pipeline.seed", 0));
    p.min_chars = cfg.get_u64("fim.min_chars", p.min_chars);
    p.validate();
    return p;
}

// mix.ratio is spelled `code:text:math`, e.g. `78:12:10`.
inline MixRatio mix_ratio_from_string(const std::string& spec) {
    std::vector<double> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= spec.size(); ++i) {
        if (i == spec.size() || spec[i] == ':') {
            std::string part(trim(std::string_view(spec).substr(start, i - start)));
            start = i + 1;
            if (part.empty()) throw ConfigError("mix.ratio has an empty component: " + spec);
            try {
                parts.push_back(std::stod(part));
            } catch (const std::exception&) {
                throw ConfigError("mix.ratio component is not a number: " + part);
            }
        }
    }
    if (parts.size() != 3) throw ConfigError("mix.ratio must be code:text:math: " + spec);
    MixRatio ratio{parts[0], parts[1], parts[2]};
    ratio.validate();
    return ratio;
}

inline MixRatio mix_ratio_from(const Config& cfg) {
    return mix_ratio_from_string(cfg.get_string("mix.ratio", "78:12:10"));
}

}  // namespace curate
