#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "curate/error.hpp"
#include "curate/record.hpp"

namespace curate {

// Manifest format: one JSON object per line, fields in schema order.
// Optional fields (signals, external_score, quality_bucket) and fields at
// their empty defaults (path, repo_id, origin_url, flags) are omitted.
// ordered_json keeps emission order stable so identical records serialize
// to identical bytes.
using ojson = nlohmann::ordered_json;

inline ojson signals_to_json(const SignalVector& sv) {
    ojson j;
    for (const auto& name : SignalVector::names()) j[name] = sv.get(name);
    return j;
}

inline SignalVector signals_from_json(const ojson& j) {
    SignalVector sv;
    for (const auto& name : SignalVector::names()) {
        if (j.contains(name)) sv.set(name, j.at(name).get<double>());
    }
    return sv;
}

inline std::string record_to_line(const DocumentRecord& rec) {
    ojson j;
    j["id"] = rec.id;
    j["source_name"] = rec.source_name;
    j["modality"] = to_string(rec.modality);
    if (!rec.path.empty()) j["path"] = rec.path;
    if (!rec.repo_id.empty()) j["repo_id"] = rec.repo_id;
    j["language"] = rec.language;
    j["language_confidence"] = rec.language_confidence;
    j["license"] = rec.license;
    if (!rec.origin_url.empty()) j["origin_url"] = rec.origin_url;
    j["content"] = rec.content;
    j["byte_len"] = rec.byte_len;
    j["est_tokens"] = rec.est_tokens;
    if (rec.signals) j["signals"] = signals_to_json(*rec.signals);
    if (rec.external_score) j["external_score"] = *rec.external_score;
    if (rec.quality_bucket) j["quality_bucket"] = to_string(*rec.quality_bucket);
    if (!rec.flags.empty()) j["flags"] = rec.flags;  // std::set keeps order
    return j.dump();
}

// Parses one manifest line. Throws MalformedRecord / EncodingError on
// schema violations; the result satisfies every record invariant.
inline DocumentRecord record_from_line(const std::string& line,
                                       const TokenEstimator& estimate = default_token_estimator()) {
    ojson j = ojson::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw MalformedRecord("manifest line is not a JSON object");
    }
    DocumentRecord rec;
    auto get_string = [&](const char* key, std::string& out) {
        if (j.contains(key)) {
            if (!j.at(key).is_string()) throw MalformedRecord(std::string(key) + " is not a string");
            out = j.at(key).get<std::string>();
        }
    };
    get_string("id", rec.id);
    get_string("source_name", rec.source_name);
    get_string("path", rec.path);
    get_string("repo_id", rec.repo_id);
    get_string("language", rec.language);
    get_string("license", rec.license);
    get_string("origin_url", rec.origin_url);
    get_string("content", rec.content);
    if (!j.contains("modality")) throw MalformedRecord("record has no modality");
    auto modality = modality_from_string(j.at("modality").get<std::string>());
    if (!modality) throw MalformedRecord("unknown modality: " + j.at("modality").dump());
    rec.modality = *modality;
    if (j.contains("language_confidence")) {
        rec.language_confidence = j.at("language_confidence").get<double>();
    } else if (rec.language != "unknown" && !rec.language.empty()) {
        rec.language_confidence = 1.0;  // trust an upstream label with no score
    }
    if (j.contains("est_tokens")) rec.est_tokens = j.at("est_tokens").get<std::uint64_t>();
    if (j.contains("signals")) rec.signals = signals_from_json(j.at("signals"));
    if (j.contains("external_score")) rec.external_score = j.at("external_score").get<double>();
    if (j.contains("quality_bucket")) {
        auto bucket = bucket_from_string(j.at("quality_bucket").get<std::string>());
        if (!bucket) throw MalformedRecord("unknown quality_bucket: " + j.at("quality_bucket").dump());
        rec.quality_bucket = *bucket;
    }
    if (j.contains("flags")) {
        for (const auto& f : j.at("flags")) rec.flags.insert(f.get<std::string>());
    }
    return validate_record(std::move(rec), estimate);
}

inline void write_manifest(const std::filesystem::path& path,
                           const std::vector<DocumentRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open manifest for writing: " + path.string());
    for (const auto& rec : records) {
        out << record_to_line(rec) << '\n';
    }
    if (!out) throw ConfigError("failed writing manifest: " + path.string());
}

inline std::vector<DocumentRecord> read_manifest_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open manifest: " + path.string());
    std::vector<DocumentRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(record_from_line(line));
    }
    return records;
}

// Shards are named `<stage>.<index>.records`. A stage writing k shards
// numbers them 0..k-1.
inline std::string shard_name(const std::string& stage, std::size_t index) {
    return stage + "." + std::to_string(index) + ".records";
}

// Writes records as numbered shards of at most shard_records each
// (everything in shard 0 when the corpus fits). Returns shard paths.
inline std::vector<std::filesystem::path> write_shards(
    const std::filesystem::path& dir, const std::string& stage,
    const std::vector<DocumentRecord>& records, std::size_t shard_records = 0) {
    std::filesystem::create_directories(dir);
    if (shard_records == 0) shard_records = records.size() == 0 ? 1 : records.size();
    std::vector<std::filesystem::path> paths;
    std::size_t index = 0;
    std::size_t start = 0;
    do {
        std::size_t end = std::min(records.size(), start + shard_records);
        std::vector<DocumentRecord> slice(records.begin() + start, records.begin() + end);
        auto path = dir / shard_name(stage, index);
        write_manifest(path, slice);
        paths.push_back(path);
        start = end;
        ++index;
    } while (start < records.size());
    return paths;
}

// Reads a manifest from a single file, or from every `*.<index>.records`
// shard in a directory in index order.
inline std::vector<DocumentRecord> read_manifest(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (!fs::exists(path)) throw ConfigError("manifest path does not exist: " + path.string());
    if (fs::is_regular_file(path)) return read_manifest_file(path);
    std::vector<std::pair<long, fs::path>> shards;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (!ends_with(name, ".records")) continue;
        // Extract the numeric shard index between the last two dots.
        std::string stem = name.substr(0, name.size() - 8);
        auto dot = stem.rfind('.');
        if (dot == std::string::npos) continue;
        std::string idx = stem.substr(dot + 1);
        if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos) continue;
        shards.emplace_back(std::stol(idx), entry.path());
    }
    std::sort(shards.begin(), shards.end());
    std::vector<DocumentRecord> records;
    for (const auto& [idx, shard_path] : shards) {
        auto part = read_manifest_file(shard_path);
        records.insert(records.end(), std::make_move_iterator(part.begin()),
                       std::make_move_iterator(part.end()));
    }
    return records;
}

}  // namespace curate
