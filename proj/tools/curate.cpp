// curate: corpus curation pipeline driver.
//
// Subcommands run either the whole configured pipeline (`run`) or a single
// stage over one manifest. Exit codes: 0 success, 1 stage failure, 2 bad
// configuration. CURATE_WORKERS caps parallelism without changing output.

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "curate/config.hpp"
#include "curate/manifest.hpp"
#include "curate/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

curate::Config load_config(const std::string& config_path,
                           const std::vector<std::string>& overrides) {
    curate::Config cfg;
    if (!config_path.empty()) cfg = curate::Config::from_file(config_path);
    for (const auto& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw curate::ConfigError("--set expects key=value, got: " + kv);
        }
        cfg.set(std::string(curate::trim(kv.substr(0, eq))),
                std::string(curate::trim(kv.substr(eq + 1))));
    }
    return cfg;
}

int run_single_stage(const std::string& stage, const std::string& input,
                     const std::string& output, const curate::Config& cfg) {
    auto records = curate::read_manifest(input);
    fs::path out_path(output);
    fs::path stage_dir = out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
    fs::create_directories(stage_dir);
    curate::StageOutput result;
    try {
        result = curate::run_stage(stage, std::move(records), cfg, stage_dir);
    } catch (const curate::ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        std::cerr << "stage '" << stage << "' failed: " << e.what() << "\n";
        return 1;
    }
    curate::write_manifest(out_path, result.records);
    curate::detail::write_stats_json(fs::path(output + ".stats.json"), result.stats);
    std::cerr << stage << ": " << result.stats.records_in << " -> "
              << result.stats.records_out << " records, " << result.stats.tokens_in << " -> "
              << result.stats.tokens_out << " tokens\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"corpus curation pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "configuration file (key = value lines)");
    app.add_option("--set", overrides, "override a config key, e.g. --set dedup.seed=7");

    auto* run_cmd = app.add_subcommand("run", "run the configured stage pipeline");

    struct StageArgs {
        CLI::App* cmd = nullptr;
        std::string input;
        std::string output;
    };
    std::map<std::string, StageArgs> stage_cmds;
    for (const char* name : {"filter", "dedup", "repo-sort", "decontam", "fim", "mix"}) {
        StageArgs& args = stage_cmds[name];  // options bind to the stored struct
        args.cmd = app.add_subcommand(name, std::string("run the ") + name + " stage");
        args.cmd->add_option("--input", args.input, "input manifest (file or shard dir)")
            ->required();
        args.cmd->add_option("--output", args.output, "output manifest file")->required();
    }

    auto* report_cmd = app.add_subcommand("report", "print retention for a pipeline run");
    std::string run_dir;
    report_cmd->add_option("--run", run_dir, "pipeline run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        curate::Config cfg = load_config(config_path, overrides);

        if (run_cmd->parsed()) {
            if (config_path.empty()) {
                std::cerr << "run requires --config\n";
                return 2;
            }
            curate::PipelineResult result = curate::run_pipeline(cfg);
            if (!result.stats.empty()) std::cout << curate::stats_summary(result.stats);
            if (result.exit_code != 0) std::cerr << result.error << "\n";
            return result.exit_code;
        }

        if (report_cmd->parsed()) {
            auto stats = curate::load_run_stats(run_dir);
            if (stats.empty()) {
                std::cerr << "no stage stats found under " << run_dir << "\n";
                return 2;
            }
            std::cout << curate::stats_summary(stats);
            return 0;
        }

        for (auto& [name, args] : stage_cmds) {
            if (args.cmd->parsed()) {
                return run_single_stage(name, args.input, args.output, cfg);
            }
        }
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const curate::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
