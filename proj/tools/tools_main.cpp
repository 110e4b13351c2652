// Command-line runner: run, validate, list-scenarios, verify.
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prethermal/config.hpp"
#include "prethermal/experiment.hpp"

namespace {

using namespace prethermal;

ExperimentConfig load(const std::string& path, const std::vector<std::string>& overrides, const std::optional<std::uint64_t>& seed)
{
    auto doc = load_config_file(path);
    for (const auto& o : overrides) apply_override(doc, o);
    if (seed) doc["seed"] = *seed;
    return parse_config(doc);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Prethermal Floquet spin dynamics runner"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", manifest_path, scratch;
    std::vector<std::string> overrides;
    int workers = 1;
    std::optional<std::uint64_t> seed;
    bool rerun = false;

    auto* run = app.add_subcommand("run", "Run the scenario described by a config file");
    run->add_option("config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run->add_option("--override", overrides, "Override a config key: dotted.key=value")->allow_extra_args(false);
    run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    run->add_option("--seed", seed, "Master seed (overrides the config)");

    auto* validate = app.add_subcommand("validate", "Check a config file against the schema");
    validate->add_option("config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
    validate->add_option("--override", overrides, "Override a config key: dotted.key=value")->allow_extra_args(false);

    app.add_subcommand("list-scenarios", "List the available scenario ids");
    app.add_subcommand("defaults", "Print every config key with its default value");

    auto* verify = app.add_subcommand("verify", "Check the files listed in a run manifest");
    verify->add_option("manifest", manifest_path, "manifest.json of a previous run")->required();
    verify->add_flag("--rerun", rerun, "Re-execute the stored config and compare outputs");
    verify->add_option("--scratch", scratch, "Output directory for --rerun");
    verify->add_option("--workers", workers, "Worker threads for --rerun")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("list-scenarios")) {
            for (const auto& s : scenarios()) std::printf("%-20s %s\n", s.id.c_str(), s.description.c_str());
            return 0;
        }
        if (app.got_subcommand("defaults")) {
            std::cout << config_defaults().dump(2) << "\n";
            return 0;
        }
        if (app.got_subcommand("validate")) {
            const auto cfg = load(config_path, overrides, std::nullopt);
            std::printf("ok: scenario %s, %zu sites, %zu frequencies\n", cfg.scenario.c_str(), cfg.model.lattice.size(),
                        cfg.drive.omegas.size());
            return 0;
        }
        if (app.got_subcommand("run")) {
            const auto cfg = load(config_path, overrides, seed);
            RunOptions opts;
            opts.out_dir = out_dir;
            opts.workers = workers;
            const auto res = run_experiment(cfg, opts);
            std::printf("wrote %zu files and %s\n", res.files.size(), res.manifest_path.c_str());
            return 0;
        }
        if (app.got_subcommand("verify")) {
            const auto check = verify_manifest(manifest_path, rerun, scratch, workers);
            for (const auto& p : check.problems) std::fprintf(stderr, "error: %s\n", p.c_str());
            if (check.ok) std::printf("manifest verified\n");
            return check.ok ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
