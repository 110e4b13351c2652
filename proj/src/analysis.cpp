#include "prethermal/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

namespace prethermal {

void EnsembleRecord::validate() const
{
    if (members.empty()) throw ContractError("ensemble has no members");
    const auto& ref = members.front();
    for (const auto& m : members) {
        if (m.cycles != ref.cycles || m.snapshot_cycles != ref.snapshot_cycles || m.period != ref.period)
            throw ContractError("ensemble members have different recording schedules");
        if (m.protocol_hash != ref.protocol_hash) throw ContractError("ensemble members have different protocols");
    }
}

std::vector<double> EnsembleRecord::mean_sz() const
{
    validate();
    std::vector<double> out(members.front().samples(), 0.0);
    for (const auto& m : members)
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += m.magnetization[k].z;
    for (auto& v : out) v /= static_cast<double>(members.size());
    return out;
}

std::vector<double> EnsembleRecord::sz_standard_error() const
{
    const auto mean = mean_sz();
    std::vector<double> out(mean.size(), 0.0);
    const double n = static_cast<double>(members.size());
    if (members.size() < 2) return out;
    for (const auto& m : members)
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += std::pow(m.magnetization[k].z - mean[k], 2);
    for (auto& v : out) v = std::sqrt(v / (n - 1.0) / n);
    return out;
}

std::vector<double> EnsembleRecord::mean_energy_density() const
{
    validate();
    std::vector<double> out(members.front().energy_density.size(), 0.0);
    for (const auto& m : members) {
        if (m.energy_density.size() != out.size()) throw ContractError("energy series lengths differ");
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += m.energy_density[k];
    }
    for (auto& v : out) v /= static_cast<double>(members.size());
    return out;
}

std::vector<std::vector<double>> EnsembleRecord::mean_site_sz() const
{
    validate();
    const auto& ref = members.front();
    if (ref.snapshots.empty()) throw ContractError("per-site data requires snapshots");
    std::vector<std::vector<double>> out(ref.snapshots.size(), std::vector<double>(ref.snapshots.front().size(), 0.0));
    for (const auto& m : members)
        for (std::size_t k = 0; k < out.size(); ++k)
            for (std::size_t i = 0; i < out[k].size(); ++i) out[k][i] += m.snapshots[k][i].z;
    const double inv = 1.0 / static_cast<double>(members.size());
    for (auto& row : out)
        for (auto& v : row) v *= inv;
    return out;
}

double delta_m(std::span<const Vec3> a, std::span<const Vec3> b)
{
    if (a.size() != b.size() || a.empty()) throw ContractError("delta_m needs states of equal, nonzero size");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += dot(a[i], b[i]);
    return 1.0 - acc / static_cast<double>(a.size());
}

std::vector<double> delta_m(const TrajectoryRecord& a, const TrajectoryRecord& b)
{
    if (a.snapshot_cycles != b.snapshot_cycles || a.period != b.period)
        throw ContractError("delta_m needs records with matching snapshot schedules");
    std::vector<double> out;
    out.reserve(a.snapshots.size());
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) out.push_back(delta_m(a.snapshots[k], b.snapshots[k]));
    return out;
}

namespace {
Mat3 inverse_kick_power(const KickSpec& kick, std::int64_t cycle)
{
    const std::int64_t m = kick.order();
    const auto p = static_cast<int>(((-cycle) % m + m) % m);
    return kick.matrix(p);
}
} // namespace

TrajectoryRecord toggling_frame(const TrajectoryRecord& record, const KickSpec& kick)
{
    TrajectoryRecord out = record;
    if (kick.order() == 1) return out;
    for (std::size_t k = 0; k < out.magnetization.size(); ++k)
        out.magnetization[k] = inverse_kick_power(kick, out.cycles[k]) * out.magnetization[k];
    for (std::size_t k = 0; k < out.snapshots.size(); ++k) {
        const Mat3 r = inverse_kick_power(kick, out.snapshot_cycles[k]);
        for (auto& v : out.snapshots[k]) v = r * v;
    }
    return out;
}

SpinState align_to_sector(const SpinState& state, const KickSpec& kick)
{
    const Vec3 m = state.magnetization();
    int best = 0;
    double best_z = -2.0;
    for (int p = 0; p < kick.order(); ++p) {
        const double z = (kick.matrix(p) * m).z;
        if (z > best_z + 1e-15) {
            best_z = z;
            best = p;
        }
    }
    SpinState out = state;
    const Mat3 r = kick.matrix(best);
    for (auto& v : out.spins) v = r * v;
    return out;
}

double Spectrum::amplitude_at(double f) const
{
    if (frequency.empty()) return 0.0;
    std::size_t best = 0;
    for (std::size_t k = 1; k < frequency.size(); ++k)
        if (std::abs(frequency[k] - f) < std::abs(frequency[best] - f)) best = k;
    return amplitude[best];
}

Spectrum subharmonic_spectrum(std::span<const double> series, std::size_t begin, std::size_t end,
                              std::size_t max_peaks)
{
    if (end > series.size() || begin >= end) throw ContractError("spectrum window outside the series");
    const std::size_t len = end - begin;
    if (len < 64) throw ContractError("spectrum window too short (need >= 64 samples)");

    std::vector<double> x(series.begin() + static_cast<std::ptrdiff_t>(begin),
                          series.begin() + static_cast<std::ptrdiff_t>(end));
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(len);
    for (auto& v : x) v -= mean;

    const std::size_t n_out = len / 2 + 1;
    std::vector<fftw_complex> out(n_out);
    {
        // Planning is not thread-safe in FFTW.
        static std::mutex plan_mutex;
        fftw_plan plan;
        {
            std::lock_guard lock(plan_mutex);
            plan = fftw_plan_dft_r2c_1d(static_cast<int>(len), x.data(), out.data(), FFTW_ESTIMATE);
        }
        fftw_execute(plan);
        std::lock_guard lock(plan_mutex);
        fftw_destroy_plan(plan);
    }

    Spectrum s;
    const double L = static_cast<double>(len);
    for (std::size_t k = 1; k < n_out; ++k) {
        const double mag = std::hypot(out[k][0], out[k][1]);
        const bool nyquist = (len % 2 == 0) && k == len / 2;
        s.frequency.push_back(static_cast<double>(k) / L);
        s.amplitude.push_back(nyquist ? mag / L : 2.0 * mag / L);
    }
    const std::size_t m = s.amplitude.size();
    for (std::size_t k = 0; k < m; ++k) {
        const double a = s.amplitude[k];
        const bool left = k == 0 || a > s.amplitude[k - 1];
        const bool right = k + 1 == m || a >= s.amplitude[k + 1];
        if (left && right && a > 0.0) s.peaks.push_back({s.frequency[k], a});
    }
    std::stable_sort(s.peaks.begin(), s.peaks.end(),
                     [](const SpectralPeak& a, const SpectralPeak& b) { return a.amplitude > b.amplitude; });
    if (s.peaks.size() > max_peaks) s.peaks.resize(max_peaks);

    std::vector<double> sorted = s.amplitude;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(m / 2), sorted.end());
    s.noise_floor = sorted[m / 2];
    return s;
}

std::vector<double> boxcar(std::span<const double> x, std::size_t width)
{
    const std::size_t n = x.size();
    std::vector<double> out(n);
    if (n == 0) return out;
    width = std::max<std::size_t>(width, 1);
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
    const std::size_t half = width / 2;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t lo = i >= half ? i - half : 0;
        if (lo + width > n) lo = n > width ? n - width : 0;
        const std::size_t hi = std::min(n, lo + width);
        out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    }
    return out;
}

MeltResult detect_melt_time(std::span<const double> times, std::span<const double> energy, double epsilon_c,
                            std::size_t width)
{
    if (times.size() != energy.size() || times.empty()) throw ContractError("melt detection needs matched series");
    const auto smooth = boxcar(energy, width);
    MeltResult r;
    for (std::size_t k = 0; k < smooth.size(); ++k) {
        if (smooth[k] > epsilon_c) {
            r.melted = true;
            r.tau = times[k];
            r.sample = k;
            return r;
        }
    }
    r.tau = times.back();
    r.sample = times.size() - 1;
    return r;
}

std::optional<double> amplitude_half_life(std::span<const double> times, std::span<const double> signal,
                                          std::size_t plateau_begin, std::size_t plateau_end, std::size_t width)
{
    if (times.size() != signal.size() || plateau_end > signal.size() || plateau_begin >= plateau_end)
        throw ContractError("invalid plateau window");
    std::vector<double> mag(signal.size());
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(signal[k]);
    const auto smooth = boxcar(mag, width);
    double level = 0.0;
    for (std::size_t k = plateau_begin; k < plateau_end; ++k) level += mag[k];
    level /= static_cast<double>(plateau_end - plateau_begin);
    for (std::size_t k = plateau_begin; k < smooth.size(); ++k)
        if (smooth[k] < 0.5 * level) return times[k];
    return std::nullopt;
}

namespace {
double stddev(std::span<const double> v)
{
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / n);
}
} // namespace

EquilibrationTimes equilibration_times(const EnsembleRecord& ensemble, const EquilibrationOptions& opts)
{
    const auto site = ensemble.mean_site_sz();
    const auto& ref = ensemble.members.front();
    std::vector<double> times;
    for (auto c : ref.snapshot_cycles) times.push_back(static_cast<double>(c) * ref.period);
    return equilibration_times(times, site, opts);
}

EquilibrationTimes equilibration_times(std::span<const double> times, const std::vector<std::vector<double>>& site,
                                       const EquilibrationOptions& opts)
{
    if (site.empty() || site.size() != times.size()) throw ContractError("equilibration needs one profile per time");
    const std::size_t n_snap = site.size();
    const std::size_t n = site.front().size();
    if (opts.block < 2 || n < 2 * opts.block) throw ContractError("lattice too small for the block size");

    std::vector<std::vector<double>> smooth(n_snap, std::vector<double>(n));
    std::vector<double> column(n_snap);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n_snap; ++k) column[k] = site[k][i];
        const auto s = boxcar(column, opts.smoothing);
        for (std::size_t k = 0; k < n_snap; ++k) smooth[k][i] = s[k];
    }

    EquilibrationTimes out;
    const std::size_t n_blocks = n / opts.block;
    std::vector<double> block_means(n_blocks);
    for (std::size_t k = 0; k < n_snap; ++k) {
        double worst = 0.0;
        for (std::size_t b = 0; b < n_blocks; ++b) {
            std::span<const double> blk(smooth[k].data() + b * opts.block, opts.block);
            worst = std::max(worst, stddev(blk));
            block_means[b] = std::accumulate(blk.begin(), blk.end(), 0.0) / static_cast<double>(opts.block);
        }
        out.local_spread.push_back(worst);
        out.global_spread.push_back(stddev(block_means));
    }
    out.tau_local = out.tau_global = times.back();
    for (std::size_t k = 0; k < n_snap; ++k) {
        const double t = times[k];
        if (!out.local_reached && out.local_spread[k] < opts.threshold) {
            out.local_reached = true;
            out.tau_local = t;
        }
        if (!out.global_reached && out.global_spread[k] < opts.threshold) {
            out.global_reached = true;
            out.tau_global = t;
        }
    }
    return out;
}

Histogram histogram_local(std::span<const double> samples, std::size_t bins, std::optional<double> lo,
                          std::optional<double> hi)
{
    if (samples.empty()) throw ContractError("histogram of an empty sample");
    if (bins < 1) throw ContractError("histogram needs at least one bin");
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    Histogram h;
    h.lo = lo.value_or(*mn);
    h.hi = hi.value_or(*mx);
    if (!(h.hi > h.lo)) {
        h.lo -= 0.5;
        h.hi += 0.5;
    }
    h.density.assign(bins, 0.0);
    const double w = h.bin_width();
    for (double v : samples) {
        if (v < h.lo || v > h.hi) continue;
        auto k = static_cast<std::size_t>((v - h.lo) / w);
        if (k >= bins) k = bins - 1;
        h.density[k] += 1.0;
        ++h.count;
    }
    for (auto& d : h.density) d /= static_cast<double>(h.count) * w;
    return h;
}

std::vector<double> local_samples(const CompiledModel& model, std::span<const SpinState> states, LocalObservable kind)
{
    std::vector<double> out;
    for (const auto& s : states) {
        auto v = local_observable_samples(model, s.spins, kind);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

double cdf_distance(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty()) throw ContractError("cdf_distance needs non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double worst = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        worst = std::max(worst, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return worst;
}

std::vector<SpinState> build_domain_wall_ensemble(const LatticeSpec& lattice, const StaticHamiltonian& d,
                                                  double eps_left, double eps_right, std::size_t n_traj,
                                                  std::uint64_t seed, const EnergyTargetOptions& opts,
                                                  const std::optional<KickSpec>& align)
{
    lattice.validate();
    if (lattice.dimension != 1) throw ContractError("domain-wall ensembles need a 1D lattice");
    if (lattice.extent % 2 != 0 || lattice.extent < 4) throw ContractError("domain-wall chain needs an even length >= 4");
    const LatticeSpec half = LatticeSpec::chain(lattice.extent / 2, Boundary::Open);
    EnergyTargetOptions o = opts;
    o.n_states = n_traj;
    const auto left = sample_at_energy(half, d, eps_left, splitmix64(seed ^ 0x1EF7ULL), o);
    const auto right = sample_at_energy(half, d, eps_right, splitmix64(seed ^ 0x219b7ULL), o);
    std::vector<SpinState> out;
    out.reserve(n_traj);
    for (std::size_t k = 0; k < n_traj; ++k) {
        auto l = align ? align_to_sector(left.states[k], *align) : left.states[k];
        auto r = align ? align_to_sector(right.states[k], *align) : right.states[k];
        std::vector<Vec3> spins = std::move(l.spins);
        spins.insert(spins.end(), r.spins.begin(), r.spins.end());
        out.emplace_back(lattice, std::move(spins));
    }
    return out;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) throw ContractError("linear fit needs >= 2 matched points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) ss_res += std::pow(y[k] - (f.intercept + f.slope * x[k]), 2);
    f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    if (x.size() > 2) f.slope_error = std::sqrt(ss_res / (n - 2.0) / sxx);
    return f;
}

} // namespace prethermal
