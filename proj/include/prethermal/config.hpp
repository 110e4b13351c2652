#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "prethermal/drive.hpp"
#include "prethermal/thermal.hpp"

namespace prethermal {

/// Invalid experiment configuration. The message names the offending dotted key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Schedule { ThreeWindow, FiveWindow };
enum class InitialRecipe { Polarized, Random, Thermal, DomainWall };

struct ModelConfig {
    LatticeSpec lattice;
    DriveParameters params;
    std::optional<KickSpec> kick;  // absent when M == 1
};

struct DriveConfig {
    std::vector<double> omegas;
    Schedule schedule = Schedule::ThreeWindow;
};

struct EnsembleConfig {
    std::size_t n_traj = 64;
    InitialRecipe initial = InitialRecipe::Polarized;
    Vec3 direction{0.0, 0.0, 1.0};
    double noise = 0.3;
    std::optional<double> target_eps;
    std::optional<double> eps_left;
    std::optional<double> eps_right;
    bool align = true;
};

struct RunConfig {
    std::int64_t n_cycles = 1000;
    std::size_t stride = 1;
    std::size_t snapshot_stride = 0;
    std::size_t csv_stride = 0;  // 0: same as stride
    double rk4_dt = 1e-3;
    bool site_columns = false;
    bool write_trajectories = true;
    std::size_t max_bytes = std::size_t{2} << 30;
};

struct AnalysisConfig {
    std::int64_t smoothing = 50;  // cycles
    double threshold = 0.05;
    std::size_t block = 5;
    std::optional<double> epsilon_c;
    std::optional<std::int64_t> plateau_begin;  // cycles
    std::optional<std::int64_t> plateau_end;
    std::int64_t hybrid_cycles = 5;
    std::size_t max_peaks = 8;
    double cdf_threshold = 0.05;
    std::size_t histogram_bins = 50;
    double decay_fraction = 0.36787944117144233;
    bool mc_match = false;
};

struct McSection {
    McConfig mc;
    std::vector<std::size_t> sizes;
    std::vector<double> temperatures;
    CrossingQuantity crossing = CrossingQuantity::OrderParameter;
    std::vector<LocalObservable> local_observables;
    std::vector<double> match_eps;
};

struct ExperimentConfig {
    std::string scenario;
    std::uint64_t seed = 1;
    ModelConfig model;
    DriveConfig drive;
    EnsembleConfig ensemble;
    RunConfig run;
    AnalysisConfig analysis;
    McSection mc;
    nlohmann::json resolved;  // defaults merged with the user document
};

struct ScenarioInfo {
    std::string id;
    std::string description;
};

const std::vector<ScenarioInfo>& scenarios();

/// Every accepted key with its default value. A null default marks an optional number.
const nlohmann::json& config_defaults();

nlohmann::json load_config_file(const std::string& path);

/// Applies `dotted.key=value`; the value is parsed as JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Merges the document over the defaults, rejecting unknown keys and mistyped values, then checks
/// scenario-specific requirements. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);

DriveProtocol make_protocol(const ExperimentConfig& cfg, double omega);

const char* to_string(Schedule s);
const char* to_string(InitialRecipe r);

} // namespace prethermal
