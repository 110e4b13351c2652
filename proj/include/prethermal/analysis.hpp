#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prethermal/drive.hpp"
#include "prethermal/floquet.hpp"
#include "prethermal/thermal.hpp"

namespace prethermal {

/// Trajectories started from a common initial ensemble under a common protocol and schedule.
struct EnsembleRecord {
    std::vector<TrajectoryRecord> members;

    void validate() const;
    std::vector<double> mean_sz() const;
    std::vector<double> sz_standard_error() const;
    std::vector<double> mean_energy_density() const;
    /// Ensemble-mean per-site S^z at every snapshot: [snapshot][site].
    std::vector<std::vector<double>> mean_site_sz() const;
};

/// delta M(t) = 1 - (1/N) sum_i S_i(t) . S'_i(t) over matching snapshots.
std::vector<double> delta_m(const TrajectoryRecord& a, const TrajectoryRecord& b);
double delta_m(std::span<const Vec3> a, std::span<const Vec3> b);

/// Applies X^{-m} to the recorded vector observables of sample m (magnetization and snapshots).
/// Sample cycles are taken from the record, so strides are handled.
TrajectoryRecord toggling_frame(const TrajectoryRecord& record, const KickSpec& kick);

/// Rotates a state by the power of the kick that brings its magnetisation closest to +z.
SpinState align_to_sector(const SpinState& state, const KickSpec& kick);

struct SpectralPeak {
    double frequency = 0.0;  // in units of the drive frequency (cycles per period), in [0, 1/2]
    double amplitude = 0.0;  // amplitude of the equivalent cosine
};

struct Spectrum {
    std::vector<double> frequency;
    std::vector<double> amplitude;
    std::vector<SpectralPeak> peaks;  // local maxima, descending amplitude
    double noise_floor = 0.0;         // median amplitude over non-DC bins

    double amplitude_at(double f) const;
};

/// DFT of the mean-removed series over [begin, end) (one sample per period). Needs >= 64 samples.
Spectrum subharmonic_spectrum(std::span<const double> series, std::size_t begin, std::size_t end,
                              std::size_t max_peaks = 8);

/// Centered moving average; near the edges the full-width window is shifted to stay inside the series.
std::vector<double> boxcar(std::span<const double> x, std::size_t width);

struct MeltResult {
    bool melted = false;
    double tau = 0.0;              // time of the first crossing, or the horizon when none
    std::size_t sample = 0;        // index into the series
    std::optional<double> amplitude_half_life;
};

/// First time the boxcar-smoothed energy density exceeds epsilon_c. `width` is in samples.
MeltResult detect_melt_time(std::span<const double> times, std::span<const double> energy_density,
                            double epsilon_c, std::size_t width = 50);

/// First time the smoothed |signal| drops below half of its mean over [plateau_begin, plateau_end).
std::optional<double> amplitude_half_life(std::span<const double> times, std::span<const double> signal,
                                          std::size_t plateau_begin, std::size_t plateau_end,
                                          std::size_t width = 50);

struct EquilibrationOptions {
    std::size_t block = 5;
    double threshold = 0.05;
    std::size_t smoothing = 50;  // snapshots
};

struct EquilibrationTimes {
    double tau_local = 0.0;
    double tau_global = 0.0;
    bool local_reached = false;
    bool global_reached = false;
    std::vector<double> local_spread;
    std::vector<double> global_spread;
};

/// tau_local: first snapshot where the largest within-block standard deviation of the
/// time-smoothed ensemble-mean S^z_i drops below threshold; tau_global: same for the standard
/// deviation of block means across blocks. Sites are taken in lattice order.
EquilibrationTimes equilibration_times(const EnsembleRecord& ensemble, const EquilibrationOptions& opts = {});

/// Same, from precomputed ensemble-mean profiles site_sz[snapshot][site] taken at `times`.
EquilibrationTimes equilibration_times(std::span<const double> times, const std::vector<std::vector<double>>& site_sz,
                                       const EquilibrationOptions& opts = {});

/// Normalised histogram. Range defaults to [min, max] of the samples.
Histogram histogram_local(std::span<const double> samples, std::size_t bins = 50, std::optional<double> lo = {},
                          std::optional<double> hi = {});

/// Pooled local-observable samples from a set of states.
std::vector<double> local_samples(const CompiledModel& model, std::span<const SpinState> states, LocalObservable kind);

/// Two-sample Kolmogorov-Smirnov statistic: sup |F_a - F_b|.
double cdf_distance(std::vector<double> a, std::vector<double> b);

/// Left half sampled at eps_left and right half at eps_right (each on an open half chain),
/// concatenated. `n_traj` independent members. With `align`, each half is first rotated into
/// the sector whose magnetisation is closest to +z.
std::vector<SpinState> build_domain_wall_ensemble(const LatticeSpec& lattice, const StaticHamiltonian& d,
                                                  double eps_left, double eps_right, std::size_t n_traj,
                                                  std::uint64_t seed, const EnergyTargetOptions& opts = {},
                                                  const std::optional<KickSpec>& align = std::nullopt);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_error = 0.0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

} // namespace prethermal
