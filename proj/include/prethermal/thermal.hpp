#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prethermal/model.hpp"
#include "prethermal/rng.hpp"

namespace prethermal {

/// Metropolis protocol. A "step" is a sweep of N single-site updates.
struct McConfig {
    std::int64_t n_equil = 10000;
    std::int64_t n_meas = 30000;
    int n_runs = 8;
    double beta = 0.0;
    std::uint64_t seed = 1;
    /// 0: propose a fresh uniform unit vector; > 0: uniform in a cone of this half-angle (radians).
    double cone_angle = 0.0;
    /// Sweeps between recorded measurements inside the measurement window.
    std::int64_t measure_every = 1;
    /// Worker threads for independent runs (results do not depend on it).
    int workers = 1;

    void validate() const;
};

enum class LocalObservable { SiteSz, BondSzSz, BondEnergy, TripleEnergy };
const char* to_string(LocalObservable k);
LocalObservable local_observable_from_string(const std::string& s);

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> density;  // normalised so that sum(density) * bin_width == 1
    std::size_t count = 0;

    double bin_width() const { return (hi - lo) / static_cast<double>(density.size()); }
    double bin_center(std::size_t k) const { return lo + (static_cast<double>(k) + 0.5) * bin_width(); }
};

struct RunStats {
    double sz = 0.0;
    double abs_sz = 0.0;
    double sz2 = 0.0;
    double sz4 = 0.0;
    double energy_density = 0.0;
    double energy_density2 = 0.0;
    double acceptance = 0.0;
};

struct Estimate {
    double mean = 0.0;
    double error = 0.0;  // standard error across independent runs
};

struct EnsembleStats {
    double beta = 0.0;
    std::size_t n_sites = 0;
    Estimate sz;
    Estimate abs_sz;
    Estimate sz2;
    Estimate sz4;
    Estimate energy_density;
    /// Binder-type ratio 1 - <m^4> / (3 <m^2>^2) from the run-averaged moments.
    double binder = 0.0;
    std::vector<RunStats> runs;
    /// Raw samples of requested local observables, pooled over runs.
    std::vector<std::vector<double>> local_samples;
    std::vector<LocalObservable> local_kinds;
};

/// Running Metropolis chain on one compiled model. Energy and magnetisation are tracked
/// incrementally from the local field.
class MetropolisChain {
public:
    MetropolisChain(const CompiledModel& model, SpinState state, Rng rng);

    /// One sweep: N updates at uniformly chosen sites. Returns accepted moves.
    std::size_t sweep(double beta, double cone_angle = 0.0);
    const SpinState& state() const { return state_; }
    double energy() const { return energy_; }
    Vec3 magnetization_sum() const { return mag_; }
    void resync();

private:
    const CompiledModel* model_;
    SpinState state_;
    Rng rng_;
    double energy_ = 0.0;
    Vec3 mag_;

    Vec3 propose(const Vec3& current, double cone_angle);
};

/// One Metropolis sweep from `state`; convenience wrapper around MetropolisChain.
SpinState metropolis_step(const SpinState& state, const StaticHamiltonian& d, double beta, Rng& rng);

struct SampleOptions {
    std::vector<LocalObservable> local_kinds;
    std::int64_t local_every = 10;  // sweeps between local-observable samples
};

EnsembleStats sample_ensemble(const LatticeSpec& lattice, const StaticHamiltonian& d, const McConfig& mc,
                              const SampleOptions& opts = {});

/// Local observable samples from a single configuration (all translates).
std::vector<double> local_observable_samples(const CompiledModel& model, const std::vector<Vec3>& spins,
                                             LocalObservable kind);

struct SweepPoint {
    double temperature = 0.0;
    EnsembleStats stats;
};

struct SweepCurve {
    LatticeSpec lattice;
    std::vector<SweepPoint> points;  // ordered by increasing temperature
};

struct SweepCurves {
    std::vector<SweepCurve> curves;
};

/// Runs sample_ensemble for every lattice and every beta.
SweepCurves temperature_sweep(const std::vector<LatticeSpec>& lattices, const StaticHamiltonian& d,
                              const std::vector<double>& betas, const McConfig& mc);

/// Which curve family is crossed to locate the transition.
enum class CrossingQuantity { OrderParameter, Binder };

struct Crossing {
    std::size_t size_a = 0;
    std::size_t size_b = 0;
    double temperature = 0.0;
};

struct CriticalPoint {
    bool detected = false;
    double T_c = 0.0;
    double T_c_error = 0.0;
    double epsilon_c = 0.0;
    double epsilon_c_error = 0.0;
    std::vector<std::size_t> sizes;
    std::vector<Crossing> crossings;
    std::string diagnostic;
};

/// Pairwise crossings (linear interpolation between sampled temperatures) of the chosen
/// quantity across system sizes. A crossing counts only where the sign change of the
/// difference exceeds the combined error bars on both sides. epsilon_c interpolates the
/// largest system's e(T) at T_c.
CriticalPoint estimate_critical(const SweepCurves& curves, CrossingQuantity quantity = CrossingQuantity::Binder);

/// Lowest-energy state found by greedy zero-temperature quenches from polarized and random starts.
SpinState ground_state_estimate(const CompiledModel& model, Rng& rng, int restarts = 4);
/// Energy density of ground_state_estimate.
double ground_energy_estimate(const CompiledModel& model, Rng& rng, int restarts = 4);

struct EnergyTargetOptions {
    std::size_t n_states = 8;
    double tolerance_fraction = 0.005;  // of the range [e_min, e(beta=0)]
    std::int64_t spacing = 10;          // sweeps between snapshots
    std::int64_t bisection_sweeps = 400;
    std::int64_t equil_sweeps = 400;
    std::int64_t max_sweeps = 200000;
    int max_bisections = 40;
    bool adaptive_cone = true;  // shrink the proposal cap at low temperature
};

struct EnergyTargetResult {
    std::vector<SpinState> states;
    double beta = 0.0;
    double tolerance = 0.0;
    double e_min = 0.0;
    double e_max = 0.0;
};

/// Canonical snapshots at the inverse temperature whose mean energy density matches the target,
/// keeping only snapshots whose own energy density lies within the tolerance of the target.
EnergyTargetResult sample_at_energy(const LatticeSpec& lattice, const StaticHamiltonian& d, double target_eps,
                                    std::uint64_t seed, const EnergyTargetOptions& opts = {});

struct MatchedEnsemble {
    double beta = 0.0;
    int refinements = 0;
    EnsembleStats stats;
};

/// Canonical statistics at the inverse temperature whose mean energy density matches `eps`.
/// beta is located as in sample_at_energy, then refined by Newton steps on the sample_ensemble
/// energy until it agrees with `eps` within two standard errors or max_refinements is reached.
MatchedEnsemble canonical_at_energy(const LatticeSpec& lattice, const StaticHamiltonian& d, double eps, McConfig mc,
                                    const SampleOptions& opts = {}, int max_refinements = 4);

} // namespace prethermal
