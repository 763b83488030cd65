#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "curate/config.hpp"
#include "curate/dedup.hpp"
#include "curate/decontam.hpp"
#include "curate/error.hpp"
#include "curate/filters.hpp"
#include "curate/fim.hpp"
#include "curate/manifest.hpp"
#include "curate/mixer.hpp"
#include "curate/parallel.hpp"
#include "curate/record.hpp"
#include "curate/repo_context.hpp"
#include "curate/signals.hpp"

namespace curate {

namespace fs = std::filesystem;

inline const std::vector<std::string>& known_stages() {
    static const std::vector<std::string> kStages = {
        "provenance", "filter", "dedup", "repo-sort", "decontam", "fim", "mix"};
    return kStages;
}

namespace detail {

inline void write_stats_json(const fs::path& path, const StageStats& stats) {
    ojson j;
    j["stage_name"] = stats.stage_name;
    j["records_in"] = stats.records_in;
    j["records_out"] = stats.records_out;
    j["tokens_in"] = stats.tokens_in;
    j["tokens_out"] = stats.tokens_out;
    ojson rej = ojson::object();
    for (const auto& [reason, count] : stats.rejections) rej[reason] = count;
    j["rejections"] = rej;
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << '\n';
}

inline StageStats read_stats_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open stats file: " + path.string());
    ojson j = ojson::parse(in);
    StageStats stats;
    stats.stage_name = j.at("stage_name").get<std::string>();
    stats.records_in = j.at("records_in").get<std::uint64_t>();
    stats.records_out = j.at("records_out").get<std::uint64_t>();
    stats.tokens_in = j.at("tokens_in").get<std::uint64_t>();
    stats.tokens_out = j.at("tokens_out").get<std::uint64_t>();
    if (j.contains("rejections")) {
        for (const auto& [reason, count] : j.at("rejections").items()) {
            stats.rejections[reason] = count.get<std::uint64_t>();
        }
    }
    return stats;
}

inline void write_rejects(const fs::path& dir, const std::string& stage,
                          const std::vector<DocumentRecord>& rejects) {
    if (rejects.empty()) return;
    write_manifest(dir / (stage + ".rejected.records"), rejects);
}

}  // namespace detail

struct StageOutput {
    std::vector<DocumentRecord> records;
    StageStats stats;
};

// --- provenance: license / source gate ------------------------------------

inline StageOutput stage_provenance(std::vector<DocumentRecord> records, const Config& cfg,
                                    const fs::path& stage_dir) {
    ProvenanceRule rule = provenance_rule_from(cfg);
    StageStats stats;
    stats.stage_name = "provenance";
    stats.records_in = records.size();
    for (const auto& r : records) stats.tokens_in += r.est_tokens;

    StageOutput out;
    std::vector<DocumentRecord> rejects;
    for (auto& rec : records) {
        GateDecision d = provenance_gate(rec, rule);
        if (d.keep) {
            out.records.push_back(std::move(rec));
        } else {
            rec.flags.insert("provenance:" + d.reason);
            ++stats.rejections[d.reason];
            rejects.push_back(std::move(rec));
        }
    }
    stats.records_out = out.records.size();
    for (const auto& r : out.records) stats.tokens_out += r.est_tokens;
    out.stats = std::move(stats);
    detail::write_rejects(stage_dir, "provenance", rejects);
    return out;
}

// --- filter: language id, rule gate, signals, buckets ----------------------

inline StageOutput stage_filter(std::vector<DocumentRecord> records, const Config& cfg,
                                const fs::path& stage_dir,
                                const LanguageDetector& detector = builtin_language_detector()) {
    RuleConfig rc = rule_config_from(cfg);
    BucketThresholds th = bucket_thresholds_from(cfg);
    const bool per_language = cfg.get_bool("buckets.per_language", false);

    StageStats stats;
    stats.stage_name = "filter";
    stats.records_in = records.size();
    for (const auto& r : records) stats.tokens_in += r.est_tokens;

    // Detection + gating + signal computation are per-record parallel.
    std::vector<char> kept(records.size(), 0);
    std::vector<std::string> reasons(records.size());
    parallel_for(records.size(), [&](std::size_t i) {
        DocumentRecord& rec = records[i];
        if (rec.language == "unknown" || rec.language.empty()) {
            LanguageGuess guess = detector(rec);
            rec.language = guess.language;
            rec.language_confidence = guess.confidence;
        }
        GateDecision d = rule_filter(rec, rc);
        if (!d.keep) {
            reasons[i] = d.reason;
            rec.flags.insert("filter:" + d.reason);
            return;
        }
        kept[i] = 1;
        rec.signals = compute_signals(rec);
    });

    StageOutput out;
    std::vector<DocumentRecord> rejects;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (kept[i]) out.records.push_back(std::move(records[i]));
        else rejects.push_back(std::move(records[i]));
    }
    for (const auto& reason : reasons) {
        if (!reason.empty()) ++stats.rejections[reason];
    }

    // Corpus-level bucketing: a single deterministic reduction over the
    // composite scores, global by default, optionally per language.
    auto assign_buckets = [&](const std::vector<std::size_t>& group) {
        if (group.empty()) return;
        std::vector<SignalVector> signals;
        std::vector<double> externals;
        signals.reserve(group.size());
        for (std::size_t idx : group) {
            signals.push_back(*out.records[idx].signals);
            externals.push_back(out.records[idx].external_score.value_or(0.0));
        }
        auto buckets = bucket_quality(signals, th, externals);
        for (std::size_t g = 0; g < group.size(); ++g) {
            out.records[group[g]].quality_bucket = buckets[g];
        }
    };
    if (per_language) {
        std::map<std::string, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < out.records.size(); ++i) {
            groups[out.records[i].language].push_back(i);
        }
        for (const auto& [lang, group] : groups) assign_buckets(group);
    } else {
        std::vector<std::size_t> all(out.records.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        assign_buckets(all);
    }

    stats.records_out = out.records.size();
    for (const auto& r : out.records) stats.tokens_out += r.est_tokens;
    out.stats = std::move(stats);
    detail::write_rejects(stage_dir, "filter", rejects);
    return out;
}

// --- dedup: exact + MinHash-LSH fuzzy removal, then URL overlap -------------

inline StageOutput stage_dedup(std::vector<DocumentRecord> records, const Config& cfg,
                               const fs::path& stage_dir) {
    DedupParams params = dedup_params_from(cfg);
    UrlBlocklist blocklist(cfg.get_list("dedup.blocked_url_patterns"));

    StageStats stats;
    stats.stage_name = "dedup";
    stats.records_in = records.size();
    for (const auto& r : records) stats.tokens_in += r.est_tokens;

    DedupResult dedup = dedup_corpus(records, params);

    // Cluster report: representative id, member count, member ids.
    {
        std::ofstream report(stage_dir / "clusters.txt", std::ios::binary);
        for (const auto& cluster : dedup.clusters) {
            report << cluster.representative << ' ' << cluster.members.size();
            for (const auto& member : cluster.members) report << ' ' << member;
            report << '\n';
        }
    }

    std::map<std::string, const DocumentRecord*> by_id;
    for (const auto& r : records) by_id[r.id] = &r;
    std::set<std::string> surviving;
    for (const auto& r : dedup.survivors) surviving.insert(r.id);

    // Duplicate reasons are resolved before any record moves out.
    std::map<std::string, std::string> removal_reason;
    for (const auto& cluster : dedup.clusters) {
        const DocumentRecord& representative = *by_id.at(cluster.representative);
        for (const auto& member : cluster.members) {
            if (member == cluster.representative) continue;
            removal_reason[member] = duplicate_reason(*by_id.at(member), representative);
        }
    }

    StageOutput out;
    std::vector<DocumentRecord> rejects;
    for (auto& rec : records) {
        if (!surviving.count(rec.id)) {
            const std::string& reason = removal_reason.at(rec.id);
            rec.flags.insert(reason);
            ++stats.rejections[reason.substr(6)];  // strip "dedup:"
            rejects.push_back(std::move(rec));
            continue;
        }
        GateDecision d = url_overlap_filter(rec, blocklist);
        if (!d.keep) {
            rec.flags.insert("dedup:" + d.reason);
            ++stats.rejections[d.reason];
            rejects.push_back(std::move(rec));
            continue;
        }
        out.records.push_back(std::move(rec));
    }

    stats.records_out = out.records.size();
    for (const auto& r : out.records) stats.tokens_out += r.est_tokens;
    out.stats = std::move(stats);
    detail::write_rejects(stage_dir, "dedup", rejects);
    return out;
}

// --- repo-sort: dependency-first concatenation into repo documents ----------

inline StageOutput stage_repo_sort(std::vector<DocumentRecord> records, const Config& cfg,
                                   const fs::path& stage_dir) {
    const std::size_t min_files = cfg.get_u64("repo.min_files", 2);
    const bool syntax_check = cfg.get_bool("repo.syntax_check", false);

    StageStats stats;
    stats.stage_name = "repo-sort";
    stats.records_in = records.size();
    for (const auto& r : records) stats.tokens_in += r.est_tokens;

    std::vector<DocumentRecord> repo_members;
    std::vector<DocumentRecord> rejects;
    StageOutput out;
    for (auto& rec : records) {
        if (rec.repo_id.empty() || rec.path.empty()) {
            out.records.push_back(std::move(rec));  // non-repo data passes through
        } else if (syntax_check && !builtin_syntax_check()(rec)) {
            rec.flags.insert("repo:syntax");
            ++stats.rejections["syntax"];
            rejects.push_back(std::move(rec));
        } else {
            repo_members.push_back(std::move(rec));
        }
    }

    RepoBuildResult built = build_repo_documents(repo_members, min_files);

    {
        std::ofstream report(stage_dir / "cycle_report.txt", std::ios::binary);
        for (const auto& edge : built.broken_edges) {
            report << edge.repo_id << ' ' << edge.importer << ' ' << edge.imported << '\n';
        }
    }

    std::set<std::string> dropped(built.dropped_single_file.begin(),
                                  built.dropped_single_file.end());
    std::vector<DocumentRecord> rejects;
    std::map<std::string, std::vector<const DocumentRecord*>> members_by_repo;
    for (const auto& rec : repo_members) members_by_repo[rec.repo_id].push_back(&rec);

    for (auto& rec : repo_members) {
        if (dropped.count(rec.repo_id)) {
            rec.flags.insert("repo:single_file");
            ++stats.rejections["single_file"];
            rejects.push_back(rec);
        }
    }

    for (auto& doc : built.documents) {
        const auto& members = members_by_repo.at(doc.repo_id);
        DocumentRecord rec;
        rec.id = "repo:" + doc.repo_id;
        rec.source_name = members.front()->source_name;
        rec.modality = Modality::Code;
        rec.repo_id = doc.repo_id;
        rec.language = doc.language;
        rec.language_confidence = 1.0;
        rec.license = members.front()->license;
        for (const auto* m : members) {
            if (m->license != rec.license) {
                rec.license = "unknown";
                break;
            }
        }
        rec.content = std::move(doc.content);
        rec.byte_len = rec.content.size();
        rec.est_tokens = default_token_estimate(rec.content);
        rec.flags.insert("repo:concatenated");
        out.records.push_back(std::move(rec));
    }

    stats.records_out = out.records.size();
    for (const auto& r : out.records) stats.tokens_out += r.est_tokens;
    out.stats = std::move(stats);
    detail::write_rejects(stage_dir, "repo-sort", rejects);
    return out;
}

// --- decontam: n-gram scan against benchmark suites -------------------------

// A suite is one directory of plain-text items (one item per file). A
// directory of directories is a set of suites.
inline std::vector<BenchmarkIndex> load_benchmark_suites(const fs::path& root,
                                                         const DecontamParams& params) {
    if (!fs::exists(root)) throw ConfigError("benchmark dir does not exist: " + root.string());
    auto load_suite = [&](const fs::path& dir) {
        std::vector<std::pair<std::string, std::string>> items;
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            std::ifstream in(file, std::ios::binary);
            std::stringstream buffer;
            buffer << in.rdbuf();
            items.emplace_back(file.filename().string(), buffer.str());
        }
        return BenchmarkIndex(dir.filename().string(), items, params);
    };
    std::vector<BenchmarkIndex> suites;
    std::vector<fs::path> subdirs;
    bool has_files = false;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) subdirs.push_back(entry.path());
        else if (entry.is_regular_file()) has_files = true;
    }
    std::sort(subdirs.begin(), subdirs.end());
    for (const auto& dir : subdirs) suites.push_back(load_suite(dir));
    if (suites.empty() && has_files) suites.push_back(load_suite(root));
    return suites;
}

inline StageOutput stage_decontam(std::vector<DocumentRecord> records, const Config& cfg,
                                  const fs::path& stage_dir) {
    DecontamParams params = decontam_params_from(cfg);
    std::string bench_dir = cfg.get_string("decontam.benchmark_dir");
    if (bench_dir.empty()) throw ConfigError("decontam.benchmark_dir is required");
    auto suites = load_benchmark_suites(bench_dir, params);

    StageStats stats;
    stats.stage_name = "decontam";
    stats.records_in = records.size();
    for (const auto& r : records) stats.tokens_in += r.est_tokens;

    std::vector<std::optional<ContaminationReport>> findings(records.size());
    parallel_for(records.size(), [&](std::size_t i) {
        for (const auto& suite : suites) {
            auto report = scan_document(records[i], suite, params);
            if (report) {
                findings[i] = std::move(report);
                return;  // first matching suite wins
            }
        }
    });

    std::ofstream report_out(stage_dir / "contamination.report", std::ios::binary);
    StageOutput out;
    std::vector<DocumentRecord> rejects;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!findings[i]) {
            out.records.push_back(std::move(records[i]));
            continue;
        }
        const auto& f = *findings[i];
        ojson j;
        j["id"] = f.record_id;
        j["suite"] = f.suite;
        j["matched_items"] = f.matched_items;
        j["hit_count"] = f.hit_count;
        j["fuzzy_score"] = f.fuzzy_score;
        report_out << j.dump() << '\n';
        records[i].flags.insert("decontam:" + f.suite);
        ++stats.rejections["contaminated"];
        rejects.push_back(std::move(records[i]));
    }

    stats.records_out = out.records.size();
    for (const auto& r : out.records) stats.tokens_out += r.est_tokens;
    out.stats = std::move(stats);
    detail::write_rejects(stage_dir, "decontam", rejects);
    return out;
}

// --- fim: fill-in-the-middle rewrite ----------------------------------------

inline StageOutput stage_fim(std::vector<DocumentRecord> records, const Config& cfg,
                             const fs::path& stage_dir) {
    (void)stage_dir;
    FimParams params = fim_params_from(cfg);

    StageStats stats;
    stats.stage_name = "fim";
    stats.records_in = records.size();
    for (const auto& r : records) stats.tokens_in += r.est_tokens;

    parallel_for(records.size(), [&](std::size_t i) { transform_record(records[i], params); });

    StageOutput out;
    out.records = std::move(records);
    stats.records_out = out.records.size();
    for (const auto& r : out.records) stats.tokens_out += r.est_tokens;
    out.stats = std::move(stats);
    return out;
}

// --- mix: token-budget selection, interleave, epoch schedule ----------------

inline StageOutput stage_mix(std::vector<DocumentRecord> records, const Config& cfg,
                             const fs::path& stage_dir) {
    if (!cfg.has("mix.budget_tokens")) throw ConfigError("mix.budget_tokens is required");
    const std::uint64_t budget = cfg.get_u64("mix.budget_tokens", 0);
    const std::uint64_t seed = cfg.get_u64("mix.seed", cfg.get_u64("pipeline.seed", 0));
    const std::size_t epochs = cfg.get_u64("mix.epochs", 3);
    MixRatio ratio = mix_ratio_from(cfg);
    BucketWeights weights;
    weights.high = cfg.get_double("mix.bucket_weights.high", 1.0);
    weights.medium = cfg.get_double("mix.bucket_weights.medium", 1.0);
    weights.low = cfg.get_double("mix.bucket_weights.low", 1.0);

    StageStats stats;
    stats.stage_name = "mix";
    stats.records_in = records.size();
    for (const auto& r : records) stats.tokens_in += r.est_tokens;

    // Instruction records feed a separate SFT manifest, not the CPT mix.
    std::map<Modality, std::vector<DocumentRecord>> pools;
    std::vector<DocumentRecord> sft;
    for (auto& rec : records) {
        if (rec.modality == Modality::Instruction) sft.push_back(std::move(rec));
        else pools[rec.modality].push_back(std::move(rec));
    }
    if (!sft.empty()) write_manifest(stage_dir / "sft.records", sft);

    MixPlan plan = plan_mix(pools, ratio, budget, seed, weights);
    EpochPlan epoch_plan = plan_epochs(epochs, seed);
    auto orderings = epoch_orderings(plan, epoch_plan);

    for (std::size_t e = 0; e < orderings.size(); ++e) {
        std::ofstream ids(stage_dir / ("epoch." + std::to_string(e + 1) + ".ids"),
                          std::ios::binary);
        for (const auto& id : orderings[e]) ids << id << '\n';
    }

    {
        ojson j;
        j["budget_tokens"] = budget;
        j["epochs"] = epochs;
        j["selected_tokens"] = plan.selected_tokens();
        j["emitted_tokens"] = plan.selected_tokens() * epochs;
        ojson rows = ojson::array();
        for (const auto& row : mix_report(plan)) {
            ojson r;
            r["modality"] = to_string(row.modality);
            r["target_tokens"] = row.target_tokens;
            r["selected_tokens"] = row.selected_tokens;
            r["selected_records"] = row.selected_records;
            r["realized_share"] = row.realized_share;
            rows.push_back(r);
        }
        j["per_modality"] = rows;
        std::ofstream report(stage_dir / "mix_report.json", std::ios::binary);
        report << j.dump(2) << '\n';
    }

    // Output manifest: the selected records in first-epoch order.
    std::map<std::string, DocumentRecord> by_id;
    for (auto& [modality, pool] : pools) {
        for (auto& rec : pool) by_id.emplace(rec.id, std::move(rec));
    }
    StageOutput out;
    std::set<std::string> selected_ids;
    for (const auto& id : orderings.front()) {
        auto it = by_id.find(id);
        if (it != by_id.end()) {
            out.records.push_back(it->second);
            selected_ids.insert(id);
        }
    }
    if (!sft.empty()) stats.rejections["sft_split"] = sft.size();
    std::uint64_t unselected = 0;
    for (const auto& [id, rec] : by_id) {
        if (!selected_ids.count(id)) ++unselected;
    }
    if (unselected > 0) stats.rejections["unselected"] = unselected;

    stats.records_out = out.records.size();
    for (const auto& r : out.records) stats.tokens_out += r.est_tokens;
    out.stats = std::move(stats);
    return out;
}

// --- pipeline orchestration --------------------------------------------------

struct PipelineResult {
    int exit_code = 0;
    std::string error;
    std::vector<StageStats> stats;
    fs::path run_dir;
};

inline std::string stage_dir_name(std::size_t index, const std::string& stage) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02zu", index);
    return std::string(buf) + "_" + stage;
}

inline StageOutput run_stage(const std::string& stage, std::vector<DocumentRecord> records,
                             const Config& cfg, const fs::path& stage_dir) {
    if (stage == "provenance") return stage_provenance(std::move(records), cfg, stage_dir);
    if (stage == "filter") return stage_filter(std::move(records), cfg, stage_dir);
    if (stage == "dedup") return stage_dedup(std::move(records), cfg, stage_dir);
    if (stage == "repo-sort") return stage_repo_sort(std::move(records), cfg, stage_dir);
    if (stage == "decontam") return stage_decontam(std::move(records), cfg, stage_dir);
    if (stage == "fim") return stage_fim(std::move(records), cfg, stage_dir);
    if (stage == "mix") return stage_mix(std::move(records), cfg, stage_dir);
    throw ConfigError("unknown stage: " + stage);
}

// Human-readable retention table mirroring per-stage and cumulative
// retention by records and tokens.
inline std::string stats_summary(const std::vector<StageStats>& stats) {
    RetentionReport report = retention_report(stats);
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-12s %12s %12s %8s %8s %8s %8s\n", "stage",
                  "records_out", "tokens_out", "rec%", "tok%", "cum_rec%", "cum_tok%");
    out += line;
    for (const auto& row : report.rows) {
        std::snprintf(line, sizeof(line),
                      "%-12s %12llu %12llu %7.1f%% %7.1f%% %7.1f%% %7.1f%%\n",
                      row.stage_name.c_str(),
                      static_cast<unsigned long long>(row.records_out),
                      static_cast<unsigned long long>(row.tokens_out),
                      100.0 * row.stage_record_retention, 100.0 * row.stage_token_retention,
                      100.0 * row.cumulative_record_retention,
                      100.0 * row.cumulative_token_retention);
        out += line;
    }
    std::snprintf(line, sizeof(line), "cumulative retention: %.1f%% records, %.1f%% tokens\n",
                  100.0 * report.cumulative_record_retention,
                  100.0 * report.cumulative_token_retention);
    out += line;
    return out;
}

// Runs the configured stage list over the input manifest. Each stage reads
// the previous stage's records and writes its own shard set plus stats; a
// stage failure halts the run with a partial retention report.
inline PipelineResult run_pipeline(const Config& cfg) {
    PipelineResult result;
    auto stages = cfg.get_list("pipeline.stages");
    if (stages.empty()) throw ConfigError("pipeline.stages is empty");
    for (const auto& stage : stages) {
        if (std::find(known_stages().begin(), known_stages().end(), stage) ==
            known_stages().end()) {
            throw ConfigError("unknown stage in pipeline.stages: " + stage);
        }
    }
    const std::string input = cfg.get_string("pipeline.input");
    if (input.empty()) throw ConfigError("pipeline.input is required");
    const std::string output_dir = cfg.get_string("pipeline.output_dir");
    if (output_dir.empty()) throw ConfigError("pipeline.output_dir is required");
    const std::size_t shard_records = cfg.get_u64("pipeline.shard_records", 0);

    result.run_dir = output_dir;
    fs::create_directories(result.run_dir);

    std::vector<DocumentRecord> records = read_manifest(input);
    for (std::size_t s = 0; s < stages.size(); ++s) {
        const std::string& stage = stages[s];
        fs::path stage_dir = result.run_dir / stage_dir_name(s + 1, stage);
        fs::create_directories(stage_dir);
        try {
            StageOutput out = run_stage(stage, std::move(records), cfg, stage_dir);
            write_shards(stage_dir, stage, out.records, shard_records);
            detail::write_stats_json(stage_dir / "stats.json", out.stats);
            result.stats.push_back(out.stats);
            records = std::move(out.records);
        } catch (const std::exception& e) {
            result.exit_code = 1;
            result.error = "stage '" + stage + "' failed: " + e.what();
            break;
        }
    }

    if (!result.stats.empty()) {
        std::ofstream retention(result.run_dir / "retention.txt", std::ios::binary);
        retention << stats_summary(result.stats);
        if (!result.error.empty()) retention << "INCOMPLETE: " << result.error << '\n';
    }
    return result;
}

// Loads stats for `curate report`: every <NN>_<stage>/stats.json under a
// run directory, in stage order.
inline std::vector<StageStats> load_run_stats(const fs::path& run_dir) {
    std::vector<fs::path> stage_dirs;
    for (const auto& entry : fs::directory_iterator(run_dir)) {
        if (entry.is_directory() && fs::exists(entry.path() / "stats.json")) {
            stage_dirs.push_back(entry.path());
        }
    }
    std::sort(stage_dirs.begin(), stage_dirs.end());
    std::vector<StageStats> stats;
    for (const auto& dir : stage_dirs) stats.push_back(detail::read_stats_json(dir / "stats.json"));
    return stats;
}

}  // namespace curate
