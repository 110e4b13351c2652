#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "prethermal/config.hpp"

namespace prethermal {

const char* code_version();

struct RunOptions {
    std::string out_dir = "out";
    int workers = 1;
};

struct OutputFile {
    std::string path;  // relative to the output directory
    std::uint64_t hash = 0;
    std::size_t bytes = 0;
};

struct RunResult {
    nlohmann::json summary;
    std::vector<OutputFile> files;  // everything except the manifest itself
    std::string manifest_path;
};

/// Runs the configured scenario and writes CSVs, summary.json and manifest.json under opts.out_dir.
/// Observable files depend only on the configuration, never on the worker count.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

/// Initial ensemble of cfg.ensemble.n_traj members drawn by the configured recipe. Member k uses
/// its own random stream derived from the seed and k.
std::vector<SpinState> initial_ensemble(const ExperimentConfig& cfg, const StaticHamiltonian& d, int workers = 1);

struct ManifestCheck {
    bool ok = true;
    std::vector<std::string> problems;
};

/// Re-hashes every listed file. With `rerun`, also re-executes the stored configuration into
/// `scratch_dir` and compares the regenerated observable files byte for byte.
ManifestCheck verify_manifest(const std::string& manifest_path, bool rerun = false, const std::string& scratch_dir = "",
                              int workers = 1);

} // namespace prethermal
