#include "prethermal/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "prethermal/analysis.hpp"
#include "prethermal/effective.hpp"
#include "prethermal/ensemble.hpp"
#include "prethermal/hash.hpp"
#include "prethermal/parallel.hpp"

#ifndef PRETHERMAL_VERSION
#define PRETHERMAL_VERSION "0.0.0"
#endif

namespace prethermal {

using nlohmann::json;
namespace fs = std::filesystem;

const char* code_version() { return PRETHERMAL_VERSION; }

namespace {

constexpr std::uint64_t kInitTag = 0x696E6974ULL;
constexpr std::uint64_t kGroundTag = 0x67726E64ULL;

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string omega_dir(double w)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "omega_%g", w);
    return buf;
}

/// Writes files below the output root and remembers their hashes.
class Outputs {
public:
    explicit Outputs(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

    void write(const std::string& rel, const std::string& content)
    {
        const fs::path p = root_ / rel;
        fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + p.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + p.string());
        files.push_back({rel, fnv1a64(content), content.size()});
    }

    const fs::path& root() const { return root_; }
    std::vector<OutputFile> files;

private:
    fs::path root_;
};

class Csv {
public:
    explicit Csv(const std::vector<std::string>& header)
    {
        for (std::size_t k = 0; k < header.size(); ++k) text_ += (k ? "," : "") + header[k];
        text_ += '\n';
    }
    void row(std::initializer_list<double> values) { row(std::vector<double>(values)); }
    void row(const std::vector<double>& values)
    {
        for (std::size_t k = 0; k < values.size(); ++k) {
            if (k) text_ += ',';
            text_ += num(values[k]);
        }
        text_ += '\n';
    }
    // Integer-valued first column keeps cycle numbers exact.
    void row(std::int64_t first, const std::vector<double>& rest)
    {
        text_ += std::to_string(first);
        for (double v : rest) text_ += ',' + num(v);
        text_ += '\n';
    }
    const std::string& str() const { return text_; }

private:
    std::string text_;
};

std::string trajectory_csv(const TrajectoryRecord& rec, const RunConfig& run)
{
    std::vector<std::string> header = {"cycle", "time", "Sz_avg", "energy_density"};
    const std::size_t n_sites = rec.snapshots.empty() ? 0 : rec.snapshots.front().size();
    if (run.site_columns)
        for (std::size_t i = 0; i < n_sites; ++i) header.push_back("sz_" + std::to_string(i));
    Csv csv(header);
    std::map<std::int64_t, std::size_t> snap_index;
    for (std::size_t k = 0; k < rec.snapshot_cycles.size(); ++k) snap_index[rec.snapshot_cycles[k]] = k;
    for (std::size_t k = 0; k < rec.samples(); ++k) {
        const auto c = rec.cycles[k];
        if (c % static_cast<std::int64_t>(run.csv_stride) != 0) continue;
        std::vector<double> v = {rec.times[k], rec.magnetization[k].z,
                                 rec.energy_density.empty() ? std::nan("") : rec.energy_density[k]};
        if (run.site_columns) {
            const auto it = snap_index.find(c);
            for (std::size_t i = 0; i < n_sites; ++i)
                v.push_back(it == snap_index.end() ? std::nan("") : rec.snapshots[it->second][i].z);
        }
        csv.row(c, v);
    }
    return csv.str();
}

std::string traj_name(std::size_t k)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "traj_%04zu.csv", k);
    return buf;
}

LatticeSpec mc_lattice(const LatticeSpec& model, std::size_t extent)
{
    return {model.dimension, static_cast<int>(extent), model.boundary};
}

json estimate_json(const Estimate& e) { return {{"mean", e.mean}, {"error", e.error}}; }

json critical_json(const CriticalPoint& cp)
{
    json j = {{"detected", cp.detected}, {"diagnostic", cp.diagnostic}, {"sizes", cp.sizes}};
    if (cp.detected) {
        j["T_c"] = cp.T_c;
        j["T_c_error"] = cp.T_c_error;
        j["epsilon_c"] = cp.epsilon_c;
        j["epsilon_c_error"] = cp.epsilon_c_error;
    }
    json cr = json::array();
    for (const auto& c : cp.crossings) cr.push_back({{"size_a", c.size_a}, {"size_b", c.size_b}, {"T", c.temperature}});
    j["crossings"] = cr;
    return j;
}

std::string curves_csv(const SweepCurves& curves)
{
    Csv csv({"size", "n_sites", "T", "beta", "Sz_avg", "Sz_avg_err", "abs_Sz", "abs_Sz_err", "Sz2", "Sz2_err", "binder",
             "energy_density", "energy_density_err"});
    for (const auto& c : curves.curves)
        for (const auto& p : c.points)
            csv.row(static_cast<std::int64_t>(c.lattice.extent),
                    {static_cast<double>(c.lattice.size()), p.temperature, p.stats.beta, p.stats.sz.mean, p.stats.sz.error,
                     p.stats.abs_sz.mean, p.stats.abs_sz.error, p.stats.sz2.mean, p.stats.sz2.error, p.stats.binder,
                     p.stats.energy_density.mean, p.stats.energy_density.error});
    return csv.str();
}

struct CriticalResult {
    CriticalPoint point;
    bool from_config = false;
};

CriticalResult critical_point(const ExperimentConfig& cfg, const StaticHamiltonian& d, Outputs& out, int workers)
{
    CriticalResult r;
    if (cfg.analysis.epsilon_c) {
        r.from_config = true;
        r.point.detected = true;
        r.point.epsilon_c = *cfg.analysis.epsilon_c;
        r.point.diagnostic = "taken from analysis.epsilon_c";
        return r;
    }
    std::vector<LatticeSpec> lattices;
    for (auto s : cfg.mc.sizes) lattices.push_back(mc_lattice(cfg.model.lattice, s));
    std::vector<double> betas;
    for (double t : cfg.mc.temperatures) betas.push_back(1.0 / t);
    McConfig mc = cfg.mc.mc;
    mc.workers = workers;
    const auto curves = temperature_sweep(lattices, d, betas, mc);
    out.write("mc_curves.csv", curves_csv(curves));
    r.point = estimate_critical(curves, cfg.mc.crossing);
    return r;
}

Vec3 tilted(const Vec3& dir, double noise, Rng& rng)
{
    if (noise == 0.0) return dir;
    const Vec3 v = dir + rng.unit_vector() * noise;
    const double n = norm(v);
    return n > 1e-12 ? v * (1.0 / n) : dir;
}

std::size_t first_index_at_or_after(const std::vector<std::int64_t>& cycles, std::int64_t c)
{
    return static_cast<std::size_t>(std::lower_bound(cycles.begin(), cycles.end(), c) - cycles.begin());
}

double fold_frequency(int k, int m)
{
    double f = std::fmod(static_cast<double>(k) / m, 1.0);
    return f > 0.5 ? 1.0 - f : f;
}

/// Largest peak amplitude further than 1.5 bins from `f`.
double largest_other_peak(const Spectrum& s, double f)
{
    const double bin = s.frequency.size() > 1 ? s.frequency[1] - s.frequency[0] : 1.0;
    double best = 0.0;
    for (const auto& p : s.peaks)
        if (std::abs(p.frequency - f) > 1.5 * bin) best = std::max(best, p.amplitude);
    return best;
}

/// Median amplitude within `band` of `f`, excluding the 1.5 bins around it.
double local_noise_floor(const Spectrum& s, double f, double band)
{
    const double bin = s.frequency.size() > 1 ? s.frequency[1] - s.frequency[0] : 1.0;
    std::vector<double> v;
    for (std::size_t k = 0; k < s.frequency.size(); ++k) {
        const double d = std::abs(s.frequency[k] - f);
        if (d <= band && d > 1.5 * bin) v.push_back(s.amplitude[k]);
    }
    if (v.empty()) return 0.0;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
    return v[v.size() / 2];
}

struct PlateauStats {
    double sz = 0.0, sz_err = 0.0, energy = 0.0;
};

PlateauStats plateau_stats(const EnsembleSeries& s, std::size_t i0, std::size_t i1)
{
    PlateauStats p;
    const double n = static_cast<double>(i1 - i0);
    for (std::size_t k = i0; k < i1; ++k) {
        p.sz += s.toggled_mean[k] / n;
        p.sz_err += s.toggled_err[k] / n;
        if (!s.energy_mean.empty()) p.energy += s.energy_mean[k] / n;
    }
    return p;
}

std::string ensemble_csv(const EnsembleSeries& s)
{
    Csv csv({"cycle", "time", "Sz_avg", "Sz_avg_err", "Sz_toggled", "Sz_toggled_err", "energy_density",
             "energy_density_err"});
    for (std::size_t k = 0; k < s.cycles.size(); ++k)
        csv.row(s.cycles[k], {s.times[k], s.sz_mean[k], s.sz_err[k], s.toggled_mean[k], s.toggled_err[k], s.energy_mean[k],
                              s.energy_err[k]});
    return csv.str();
}

std::string sites_csv(const EnsembleSeries& s)
{
    std::vector<std::string> header = {"cycle", "time"};
    const std::size_t n = s.site_sz.empty() ? 0 : s.site_sz.front().size();
    for (std::size_t i = 0; i < n; ++i) header.push_back("sz_" + std::to_string(i));
    Csv csv(header);
    for (std::size_t k = 0; k < s.site_sz.size(); ++k) {
        std::vector<double> v = {static_cast<double>(s.snapshot_cycles[k]) * s.period};
        v.insert(v.end(), s.site_sz[k].begin(), s.site_sz[k].end());
        csv.row(s.snapshot_cycles[k], v);
    }
    return csv.str();
}

json histogram_comparison(const std::vector<std::vector<double>>& floquet, const EnsembleStats& mc,
                          const ExperimentConfig& cfg, Outputs& out, const std::string& dir)
{
    json arr = json::array();
    for (std::size_t k = 0; k < cfg.mc.local_observables.size(); ++k) {
        const auto kind = cfg.mc.local_observables[k];
        const auto& a = floquet[k];
        const auto& b = mc.local_samples[k];
        if (a.empty() || b.empty()) continue;
        const double lo = std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
        const double hi = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
        const auto ha = histogram_local(a, cfg.analysis.histogram_bins, lo, hi);
        const auto hb = histogram_local(b, cfg.analysis.histogram_bins, lo, hi);
        Csv csv({"bin_center", "floquet_density", "mc_density"});
        for (std::size_t i = 0; i < ha.density.size(); ++i) csv.row({ha.bin_center(i), ha.density[i], hb.density[i]});
        out.write(dir + "/histogram_" + std::string(to_string(kind)) + ".csv", csv.str());
        const double dist = cdf_distance(a, b);
        arr.push_back({{"observable", to_string(kind)},
                       {"cdf_distance", dist},
                       {"threshold", cfg.analysis.cdf_threshold},
                       {"agree", dist < cfg.analysis.cdf_threshold}});
    }
    return arr;
}

// ---------------------------------------------------------------------------------------------

json run_single_vs_effective(const ExperimentConfig& cfg, const StaticHamiltonian& d, Outputs& out, int workers)
{
    ExperimentConfig one = cfg;
    one.ensemble.n_traj = 1;
    const SpinState init = initial_ensemble(one, d, workers).front();
    const auto& lat = cfg.model.lattice;
    const CompiledModel model(d, lat);
    Rng ground_rng = Rng::stream(cfg.seed ^ kGroundTag, 0);
    const double e_min = ground_energy_estimate(model, ground_rng);
    const double range = -e_min;

    json runs = json::array();
    for (double w : cfg.drive.omegas) {
        const auto proto = make_protocol(cfg, w);
        const double T = proto.period;
        const RecordSpec rs{cfg.run.stride, cfg.run.stride, cfg.run.max_bytes};
        const auto k = cfg.analysis.hybrid_cycles;

        TrajectoryRecord f, dd, hh;
        double dt_used = 0.0;
        // The three trajectories are independent, so they can run side by side.
        parallel_for(3, workers, [&](std::size_t which) {
            if (which == 0) {
                f = run_trajectory(init, proto, cfg.run.n_cycles, rs, &d).record;
                // D generates the dynamics in the rotating frame of the kick.
                if (proto.kick) f = toggling_frame(f, *proto.kick);
            } else if (which == 1) {
                auto r = evolve_under_d(init, d, static_cast<double>(cfg.run.n_cycles) * T, cfg.run.rk4_dt, T, rs);
                dt_used = r.dt_used;
                dd = std::move(r.record);
            } else {
                SpinState start = init;
                TrajectoryRecord head;
                if (k > 0) {
                    auto r = evolve_under_d(init, d, static_cast<double>(k) * T, cfg.run.rk4_dt, T, rs);
                    head = std::move(r.record);
                    start = r.final_state;
                }
                auto tail = run_trajectory(start, proto, cfg.run.n_cycles - k, rs, &d).record;
                if (proto.kick) tail = toggling_frame(tail, *proto.kick);
                // Splice: D part for cycles < k, then the Floquet part shifted by k.
                hh.period = T;
                for (std::size_t s = 0; s < head.samples(); ++s) {
                    if (head.cycles[s] >= k) break;
                    hh.cycles.push_back(head.cycles[s]);
                    hh.times.push_back(head.times[s]);
                    hh.magnetization.push_back(head.magnetization[s]);
                    hh.energy_density.push_back(head.energy_density[s]);
                    hh.snapshot_cycles.push_back(head.snapshot_cycles[s]);
                    hh.snapshots.push_back(head.snapshots[s]);
                }
                for (std::size_t s = 0; s < tail.samples(); ++s) {
                    hh.cycles.push_back(tail.cycles[s] + k);
                    hh.times.push_back(static_cast<double>(tail.cycles[s] + k) * T);
                    hh.magnetization.push_back(tail.magnetization[s]);
                    hh.energy_density.push_back(tail.energy_density[s]);
                    hh.snapshot_cycles.push_back(tail.snapshot_cycles[s] + k);
                    hh.snapshots.push_back(std::move(tail.snapshots[s]));
                }
            }
        });

        const std::string dir = omega_dir(w);
        if (cfg.run.write_trajectories) {
            out.write(dir + "/trajectories/floquet.csv", trajectory_csv(f, cfg.run));
            out.write(dir + "/trajectories/effective.csv", trajectory_csv(dd, cfg.run));
            out.write(dir + "/trajectories/hybrid.csv", trajectory_csv(hh, cfg.run));
        }
        const auto dm_fd = delta_m(f, dd);
        const auto dm_fh = delta_m(f, hh);
        Csv csv({"cycle", "time", "delta_m_FD", "delta_m_FH", "energy_F", "energy_D", "energy_H", "Sz_F", "Sz_D", "Sz_H"});
        double max_de = 0.0;
        for (std::size_t s = 0; s < f.samples(); ++s) {
            csv.row(f.cycles[s], {f.times[s], dm_fd[s], dm_fh[s], f.energy_density[s], dd.energy_density[s], hh.energy_density[s],
                                  f.magnetization[s].z, dd.magnetization[s].z, hh.magnetization[s].z});
            max_de = std::max(max_de, std::abs(f.energy_density[s] - f.energy_density[0]));
        }
        out.write(dir + "/delta_m.csv", csv.str());

        const std::size_t half = f.samples() - f.samples() / 4;  // plateau: last quarter
        double plateau_fd = 0.0, plateau_fh = 0.0, track = 0.0;
        for (std::size_t s = half; s < f.samples(); ++s) {
            plateau_fd += dm_fd[s];
            plateau_fh += dm_fh[s];
        }
        for (std::size_t s = 0; s < f.samples(); ++s) track = std::max(track, std::abs(dm_fd[s] - dm_fh[s]));
        const double nh = static_cast<double>(f.samples() - half);
        runs.push_back({{"omega", w},
                        {"period", T},
                        {"rk4_dt", dt_used},
                        {"delta_m_plateau", plateau_fd / nh},
                        {"delta_m_hybrid_plateau", plateau_fh / nh},
                        {"delta_m_max_track_difference", track},
                        {"energy_initial", f.energy_density.front()},
                        {"energy_max_change", max_de},
                        {"energy_change_fraction", range > 0.0 ? max_de / range : 0.0}});
    }
    return {{"e_min", e_min}, {"infinite_temperature_range", range}, {"runs", runs}};
}

json run_ensemble_scenario(const ExperimentConfig& cfg, const StaticHamiltonian& d, Outputs& out, int workers)
{
    const auto& a = cfg.analysis;
    const auto& lat = cfg.model.lattice;
    json summary;

    // Critical point only matters for melting; the other scenarios use it when configured.
    std::optional<CriticalResult> crit;
    if (cfg.scenario == "cpdtc" || a.epsilon_c) {
        crit = critical_point(cfg, d, out, workers);
        summary["critical_point"] = critical_json(crit->point);
        summary["critical_point"]["from_config"] = crit->from_config;
    }

    // Canonical order parameter of D at the critical energy on the simulated lattice. The
    // magnetisation melts when the toggled order falls to this value.
    struct OrderAtCritical {
        double level = 0.0, lo = 0.0, hi = 0.0;
    };
    std::optional<OrderAtCritical> order_c;
    if (cfg.scenario == "cpdtc" && crit && crit->point.detected && crit->point.epsilon_c < 0.0) {
        McConfig mc = cfg.mc.mc;
        mc.workers = workers;
        mc.seed = splitmix64(cfg.seed ^ 0x6F72646572ULL);
        const double e_c = crit->point.epsilon_c, e_err = crit->point.epsilon_c_error;
        const auto at = [&](double eps) { return canonical_at_energy(lat, d, eps, mc); };
        const auto mid = at(e_c);
        OrderAtCritical oc{mid.stats.abs_sz.mean, mid.stats.abs_sz.mean, mid.stats.abs_sz.mean};
        json j = {{"beta", mid.beta}, {"abs_sz", estimate_json(mid.stats.abs_sz)},
                  {"energy_density", estimate_json(mid.stats.energy_density)}};
        if (e_err > 0.0) {
            // Lower energy means more order.
            oc.hi = at(e_c - e_err).stats.abs_sz.mean;
            oc.lo = at(e_c + e_err).stats.abs_sz.mean;
            j["abs_sz_range"] = {oc.lo, oc.hi};
        }
        summary["critical_point"]["order_at_epsilon_c"] = j;
        order_c = oc;
    }

    const auto init = initial_ensemble(cfg, d, workers);
    const bool want_hist = a.mc_match && !cfg.mc.local_observables.empty() && a.plateau_begin && a.plateau_end;
    const double expected_f = cfg.model.kick ? fold_frequency(cfg.model.kick->winding(), cfg.model.kick->order()) : 0.0;

    json runs = json::array();
    std::vector<EnsembleSeries> all_series;
    for (double w : cfg.drive.omegas) {
        const auto proto = make_protocol(cfg, w);
        const double T = proto.period;
        const std::string dir = omega_dir(w);

        EnsembleRunSpec spec;
        spec.n_cycles = cfg.run.n_cycles;
        spec.record = RecordSpec{cfg.run.stride, cfg.run.snapshot_stride, cfg.run.max_bytes};
        spec.workers = workers;

        std::vector<std::vector<double>> floquet_local(cfg.mc.local_observables.size());
        const CompiledModel model(d, lat);
        auto sink = [&](std::size_t idx, const TrajectoryRecord& rec) {
            if (cfg.run.write_trajectories) out.write(dir + "/trajectories/" + traj_name(idx), trajectory_csv(rec, cfg.run));
            if (want_hist) {
                std::vector<std::size_t> in_window;
                for (std::size_t k = 0; k < rec.snapshot_cycles.size(); ++k)
                    if (rec.snapshot_cycles[k] >= *a.plateau_begin && rec.snapshot_cycles[k] < *a.plateau_end) in_window.push_back(k);
                const std::size_t step = std::max<std::size_t>(1, in_window.size() / 20);
                for (std::size_t j = 0; j < in_window.size(); j += step)
                    for (std::size_t q = 0; q < floquet_local.size(); ++q) {
                        const auto v = local_observable_samples(model, rec.snapshots[in_window[j]], cfg.mc.local_observables[q]);
                        floquet_local[q].insert(floquet_local[q].end(), v.begin(), v.end());
                    }
            }
        };
        auto series = run_ensemble(init, proto, &d, spec, sink);
        out.write(dir + "/ensemble.csv", ensemble_csv(series));
        if (!series.site_sz.empty()) out.write(dir + "/sites.csv", sites_csv(series));

        json r = {{"omega", w}, {"period", T}, {"members", series.members}, {"j_local", j_local(proto, lat)}};
        const std::size_t width = static_cast<std::size_t>(std::max<std::int64_t>(1, a.smoothing / static_cast<std::int64_t>(cfg.run.stride)));

        // Local and global equilibration from the toggled per-site profiles.
        std::optional<EquilibrationTimes> eq;
        if (!series.site_sz.empty() && lat.size() >= 2 * a.block) {
            std::vector<double> snap_t;
            for (auto c : series.snapshot_cycles) snap_t.push_back(static_cast<double>(c) * T);
            EquilibrationOptions eo;
            eo.block = a.block;
            eo.threshold = a.threshold;
            eo.smoothing = static_cast<std::size_t>(std::max<std::int64_t>(1, a.smoothing / static_cast<std::int64_t>(cfg.run.snapshot_stride)));
            eq = equilibration_times(snap_t, series.site_sz, eo);
            r["tau_local"] = eq->tau_local;
            r["tau_global"] = eq->tau_global;
            r["local_reached"] = eq->local_reached;
            r["global_reached"] = eq->global_reached;
        }

        // Melting: first crossing of epsilon_c by the smoothed ensemble energy.
        std::optional<MeltResult> melt;
        if (crit && crit->point.detected) {
            melt = detect_melt_time(series.times, series.energy_mean, crit->point.epsilon_c, width);
            r["melted"] = melt->melted;
            r["tau_melt"] = melt->tau;
            r["tau_melt_cycles"] = melt->tau / T;
            if (crit->point.epsilon_c_error > 0.0) {
                const auto lo = detect_melt_time(series.times, series.energy_mean, crit->point.epsilon_c - crit->point.epsilon_c_error, width);
                const auto hi = detect_melt_time(series.times, series.energy_mean, crit->point.epsilon_c + crit->point.epsilon_c_error, width);
                r["tau_melt_range"] = {lo.tau, hi.tau};
            }
        }

        // Toggled magnetisation: sign persistence and decay.
        const auto smooth = boxcar(series.toggled_mean, width);
        double sign_until = series.times.back();
        const double s0 = smooth.front() >= 0.0 ? 1.0 : -1.0;
        for (std::size_t k = 0; k < smooth.size(); ++k)
            if (s0 * smooth[k] <= 0.0) {
                sign_until = series.times[k];
                break;
            }
        r["sign_constant_until"] = sign_until;
        const double m0 = std::abs(series.toggled_mean.front());
        std::optional<double> tau_decay;
        for (std::size_t k = 0; k < smooth.size(); ++k)
            if (std::abs(smooth[k]) < a.decay_fraction * m0) {
                tau_decay = series.times[k];
                break;
            }
        if (order_c) {
            const auto below = [&](double level) {
                for (std::size_t k = 0; k < smooth.size(); ++k)
                    if (s0 * smooth[k] < level) return series.times[k];
                return series.times.back();
            };
            r["tau_order_melt"] = below(order_c->level);
            r["tau_order_melt_range"] = {below(order_c->hi), below(order_c->lo)};
        }
        r["initial_sz"] = series.toggled_mean.front();
        if (tau_decay && *tau_decay > 0.0) {
            r["tau_decay"] = *tau_decay;
            r["decay_rate"] = 1.0 / *tau_decay;
        } else {
            r["tau_decay"] = nullptr;
        }

        // Plateau window in cycles.
        std::int64_t begin_c = 0, end_c = cfg.run.n_cycles;
        if (a.plateau_begin)
            begin_c = *a.plateau_begin;
        else if (eq)
            begin_c = static_cast<std::int64_t>(std::ceil(2.0 * eq->tau_global / T));
        if (a.plateau_end)
            end_c = *a.plateau_end;
        else if (melt && melt->melted)
            end_c = static_cast<std::int64_t>(std::floor(0.5 * melt->tau / T));
        end_c = std::min(end_c, cfg.run.n_cycles);
        r["plateau_window"] = {begin_c, end_c};
        const std::size_t i0 = first_index_at_or_after(series.cycles, begin_c);
        std::size_t i1 = first_index_at_or_after(series.cycles, end_c + 1);
        if (i1 > i0) {
            const auto ps = plateau_stats(series, i0, i1);
            r["plateau_sz"] = ps.sz;
            r["plateau_sz_error"] = ps.sz_err;
            r["plateau_energy"] = ps.energy;
            if (crit && crit->point.detected && i0 < i1)
                r["half_life"] = amplitude_half_life(series.times, series.toggled_mean, i0, i1, width).value_or(series.times.back());
        }

        // Spectrum of the lab-frame magnetisation; needs one sample per period.
        if (cfg.run.stride != 1) {
            r["spectrum"] = "skipped: needs run.stride = 1";
        } else if (i1 <= i0 || i1 - i0 < 64) {
            r["spectrum"] = "skipped: plateau window shorter than 64 cycles";
        } else {
            // Trim to a whole number of subharmonic periods so the expected line sits on a bin.
            const std::size_t m = cfg.model.kick ? static_cast<std::size_t>(2 * cfg.model.kick->order()) : 2;
            const std::size_t len = (i1 - i0) / m * m;
            const auto spec_r = subharmonic_spectrum(series.sz_mean, i0, i0 + len, a.max_peaks);
            Csv csv({"frequency", "amplitude"});
            for (std::size_t k = 0; k < spec_r.frequency.size(); ++k) csv.row({spec_r.frequency[k], spec_r.amplitude[k]});
            out.write(dir + "/spectrum.csv", csv.str());
            json peaks = json::array();
            for (const auto& p : spec_r.peaks) peaks.push_back({{"frequency", p.frequency}, {"amplitude", p.amplitude}});
            const double other = largest_other_peak(spec_r, expected_f);
            const double at = spec_r.amplitude_at(expected_f);
            r["spectrum"] = {{"samples", len},
                             {"peaks", peaks},
                             {"noise_floor", spec_r.noise_floor},
                             {"local_noise_floor", local_noise_floor(spec_r, expected_f, 0.05)},
                             {"expected_frequency", expected_f},
                             {"amplitude_at_expected", at},
                             {"largest_other_peak", other},
                             {"peak_ratio", other > 0.0 ? at / other : std::numeric_limits<double>::infinity()},
                             {"dominant_frequency", spec_r.peaks.empty() ? 0.0 : spec_r.peaks.front().frequency},
                             {"dominant_offset", spec_r.peaks.empty() ? 0.5 : std::abs(spec_r.peaks.front().frequency - expected_f)},
                             {"resolution", 1.0 / static_cast<double>(len)}};
            // A short zoom into the plateau for period-resolved plots.
            Csv zoom({"cycle", "time", "Sz_avg", "Sz_toggled"});
            for (std::size_t k = i0; k < std::min(i1, i0 + 30); ++k)
                zoom.row(series.cycles[k], {series.times[k], series.sz_mean[k], series.toggled_mean[k]});
            out.write(dir + "/zoom.csv", zoom.str());
        }

        // Domain-wall halves.
        if (cfg.ensemble.initial == InitialRecipe::DomainWall && !series.site_sz.empty()) {
            const std::size_t n = lat.size(), h = n / 2;
            Csv csv({"cycle", "time", "Sz_left", "Sz_right"});
            std::vector<double> left, right;
            for (std::size_t k = 0; k < series.site_sz.size(); ++k) {
                const auto& row = series.site_sz[k];
                left.push_back(std::accumulate(row.begin(), row.begin() + static_cast<long>(h), 0.0) / static_cast<double>(h));
                right.push_back(std::accumulate(row.begin() + static_cast<long>(h), row.end(), 0.0) / static_cast<double>(n - h));
                csv.row(series.snapshot_cycles[k], {static_cast<double>(series.snapshot_cycles[k]) * T, left.back(), right.back()});
            }
            out.write(dir + "/halves.csv", csv.str());
            const std::size_t j0 = first_index_at_or_after(series.snapshot_cycles, begin_c);
            const std::size_t j1 = first_index_at_or_after(series.snapshot_cycles, end_c + 1);
            if (j1 > j0) {
                r["plateau_left"] = std::accumulate(left.begin() + static_cast<long>(j0), left.begin() + static_cast<long>(j1), 0.0) / static_cast<double>(j1 - j0);
                r["plateau_right"] = std::accumulate(right.begin() + static_cast<long>(j0), right.begin() + static_cast<long>(j1), 0.0) / static_cast<double>(j1 - j0);
            }
        }

        // Canonical reference at the plateau energy.
        if (a.mc_match && r.contains("plateau_energy")) {
            McConfig mc = cfg.mc.mc;
            mc.workers = workers;
            SampleOptions so;
            so.local_kinds = cfg.mc.local_observables;
            const auto m = canonical_at_energy(lat, d, r["plateau_energy"].get<double>(), mc, so);
            r["mc_reference"] = {{"beta", m.beta}, {"refinements", m.refinements}, {"abs_sz", estimate_json(m.stats.abs_sz)},
                                 {"sz2", estimate_json(m.stats.sz2)}, {"energy_density", estimate_json(m.stats.energy_density)}};
            const double diff = std::abs(std::abs(r["plateau_sz"].get<double>()) - m.stats.abs_sz.mean);
            const double sigma = std::hypot(r["plateau_sz_error"].get<double>(), m.stats.abs_sz.error);
            r["mc_reference"]["difference"] = diff;
            r["mc_reference"]["combined_sigma"] = sigma;
            if (want_hist) r["histograms"] = histogram_comparison(floquet_local, m.stats, cfg, out, dir);
        }
        runs.push_back(r);
        all_series.push_back(std::move(series));
    }
    summary["runs"] = runs;

    // Cross-frequency summaries.
    std::vector<double> ws, log_tau, tau_global, rates;
    bool monotone = true;
    double prev = -1.0;
    for (const auto& r : runs) {
        if (r.contains("tau_global")) tau_global.push_back(r["tau_global"].get<double>());
        if (r.contains("decay_rate")) rates.push_back(r["decay_rate"].get<double>());
        if (r.value("melted", false)) {
            const double t = r["tau_melt"].get<double>();
            ws.push_back(r["omega"].get<double>());
            log_tau.push_back(std::log(t));
            monotone = monotone && t > prev;
            prev = t;
        }
    }
    if (ws.size() >= 2) {
        const auto fit = linear_fit(ws, log_tau);
        summary["lifetime_fit"] = {{"frequencies", ws.size()}, {"monotone", monotone}, {"slope", fit.slope},
                                   {"slope_error", fit.slope_error}, {"r_squared", fit.r_squared}};
    }
    auto ratio = [](const std::vector<double>& v) {
        const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
        return *mn > 0.0 ? *mx / *mn : std::numeric_limits<double>::infinity();
    };
    if (tau_global.size() >= 2) summary["tau_global_ratio"] = ratio(tau_global);
    if (rates.size() >= 2) summary["decay_rate_ratio"] = ratio(rates);
    if (all_series.size() >= 2) {
        json conv = json::array();
        for (std::size_t k = 1; k < all_series.size(); ++k) {
            const auto& p = all_series[k - 1];
            const auto& q = all_series[k];
            double worst = 0.0;
            const std::size_t n = std::min(p.toggled_mean.size(), q.toggled_mean.size());
            for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(p.toggled_mean[i] - q.toggled_mean[i]));
            conv.push_back({{"omega_a", cfg.drive.omegas[k - 1]}, {"omega_b", cfg.drive.omegas[k]}, {"max_sz_difference", worst}});
        }
        summary["frequency_convergence"] = conv;
    }
    return summary;
}

json run_mc_reference(const ExperimentConfig& cfg, const StaticHamiltonian& d, Outputs& out, int workers)
{
    json summary;
    ExperimentConfig c = cfg;
    c.analysis.epsilon_c.reset();
    const auto crit = critical_point(c, d, out, workers);
    summary["critical_point"] = critical_json(crit.point);

    json table = json::array();
    Csv csv({"epsilon", "beta", "abs_Sz", "abs_Sz_err", "Sz2", "Sz2_err", "energy_density", "energy_density_err"});
    for (std::size_t k = 0; k < cfg.mc.match_eps.size(); ++k) {
        const double eps = cfg.mc.match_eps[k];
        McConfig mc = cfg.mc.mc;
        mc.workers = workers;
        mc.seed = splitmix64(cfg.seed + k);
        SampleOptions so;
        so.local_kinds = cfg.mc.local_observables;
        const auto m = canonical_at_energy(cfg.model.lattice, d, eps, mc, so);
        csv.row({eps, m.beta, m.stats.abs_sz.mean, m.stats.abs_sz.error, m.stats.sz2.mean, m.stats.sz2.error,
                 m.stats.energy_density.mean, m.stats.energy_density.error});
        table.push_back({{"epsilon", eps}, {"beta", m.beta}, {"refinements", m.refinements}, {"abs_sz", estimate_json(m.stats.abs_sz)}});
        for (std::size_t q = 0; q < m.stats.local_kinds.size(); ++q) {
            const auto h = histogram_local(m.stats.local_samples[q], cfg.analysis.histogram_bins);
            Csv hc({"bin_center", "density"});
            for (std::size_t i = 0; i < h.density.size(); ++i) hc.row({h.bin_center(i), h.density[i]});
            char name[96];
            std::snprintf(name, sizeof name, "histograms/eps_%g_%s.csv", eps, to_string(m.stats.local_kinds[q]));
            out.write(name, hc.str());
        }
    }
    if (!cfg.mc.match_eps.empty()) out.write("matched_table.csv", csv.str());
    summary["matched"] = table;
    return summary;
}

std::string iso_time(std::chrono::system_clock::time_point t)
{
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

std::vector<SpinState> initial_ensemble(const ExperimentConfig& cfg, const StaticHamiltonian& d, int workers)
{
    const auto& e = cfg.ensemble;
    const auto& lat = cfg.model.lattice;
    std::vector<SpinState> out(e.n_traj);
    parallel_for(e.n_traj, workers, [&](std::size_t k) {
        Rng rng = Rng::stream(cfg.seed ^ kInitTag, k);
        const std::uint64_t member_seed = rng.next_u64();
        switch (e.initial) {
        case InitialRecipe::Polarized: {
            std::vector<Vec3> spins(lat.size());
            for (auto& s : spins) s = tilted(e.direction, e.noise, rng);
            out[k] = SpinState(lat, std::move(spins));
            break;
        }
        case InitialRecipe::Random: out[k] = SpinState::random(lat, rng); break;
        case InitialRecipe::Thermal: {
            EnergyTargetOptions o;
            o.n_states = 1;
            auto s = sample_at_energy(lat, d, *e.target_eps, member_seed, o).states.front();
            out[k] = (e.align && cfg.model.kick) ? align_to_sector(s, *cfg.model.kick) : s;
            break;
        }
        case InitialRecipe::DomainWall: {
            EnergyTargetOptions o;
            std::optional<KickSpec> align;
            if (e.align && cfg.model.kick) align = cfg.model.kick;
            out[k] = build_domain_wall_ensemble(lat, d, *e.eps_left, *e.eps_right, 1, member_seed, o, align).front();
            break;
        }
        }
    });
    return out;
}

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts)
{
    const auto start = std::chrono::system_clock::now();
    const auto t0 = std::chrono::steady_clock::now();
    Outputs out(opts.out_dir);
    const int workers = std::max(opts.workers, 1);

    const auto d = build_effective(make_protocol(cfg, cfg.drive.omegas.front()));
    json summary = {{"scenario", cfg.scenario},
                    {"seed", cfg.seed},
                    {"n_sites", cfg.model.lattice.size()},
                    {"kick", cfg.model.kick ? json{{"axis", to_string(cfg.model.kick->axis())},
                                                   {"k", cfg.model.kick->winding()},
                                                   {"M", cfg.model.kick->order()},
                                                   {"angle", cfg.model.kick->angle()}}
                                            : json(nullptr)}};
    if (cfg.model.kick)
        summary["emergent_symmetry"] = verify_emergent_symmetry(d, *cfg.model.kick, cfg.model.lattice);

    json body;
    if (cfg.scenario == "single_vs_effective")
        body = run_single_vs_effective(cfg, d, out, workers);
    else if (cfg.scenario == "mc_reference")
        body = run_mc_reference(cfg, d, out, workers);
    else
        body = run_ensemble_scenario(cfg, d, out, workers);
    for (auto it = body.begin(); it != body.end(); ++it) summary[it.key()] = it.value();

    out.write("summary.json", summary.dump(2) + "\n");

    const auto end = std::chrono::system_clock::now();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string canonical = cfg.resolved.dump();
    json files = json::array();
    for (const auto& f : out.files) files.push_back({{"path", f.path}, {"fnv1a64", hex64(f.hash)}, {"bytes", f.bytes}});
    json manifest = {{"config_hash", hex64(fnv1a64(canonical))},
                     {"config", cfg.resolved},
                     {"scenario", cfg.scenario},
                     {"seed", cfg.seed},
                     {"code_version", code_version()},
                     {"rng", std::string(Rng::generator_name)},
                     {"workers", workers},
                     {"files", files},
                     {"wall_clock", {{"start", iso_time(start)}, {"end", iso_time(end)}, {"seconds", seconds}}}};
    const fs::path mpath = out.root() / "manifest.json";
    std::ofstream(mpath) << manifest.dump(2) << "\n";

    RunResult res;
    res.summary = std::move(summary);
    res.files = out.files;
    res.manifest_path = mpath.string();
    return res;
}

ManifestCheck verify_manifest(const std::string& manifest_path, bool rerun, const std::string& scratch_dir, int workers)
{
    ManifestCheck check;
    std::ifstream in(manifest_path);
    if (!in) {
        check.ok = false;
        check.problems.push_back("cannot open " + manifest_path);
        return check;
    }
    json m;
    try {
        m = json::parse(in);
    } catch (const json::exception& e) {
        check.ok = false;
        check.problems.push_back(std::string("manifest is not valid JSON: ") + e.what());
        return check;
    }
    const fs::path root = fs::path(manifest_path).parent_path();
    auto slurp = [](const fs::path& p, std::string& data) {
        std::ifstream f(p, std::ios::binary);
        if (!f) return false;
        std::ostringstream ss;
        ss << f.rdbuf();
        data = ss.str();
        return true;
    };
    if (hex64(fnv1a64(m.at("config").dump())) != m.at("config_hash").get<std::string>())
        check.problems.push_back("config hash does not match the stored config");
    for (const auto& f : m.at("files")) {
        std::string data;
        const auto rel = f.at("path").get<std::string>();
        if (!slurp(root / rel, data))
            check.problems.push_back("missing file " + rel);
        else if (hex64(fnv1a64(data)) != f.at("fnv1a64").get<std::string>())
            check.problems.push_back("hash mismatch for " + rel);
    }
    if (rerun) {
        const auto cfg = parse_config(m.at("config"));
        RunOptions o;
        o.out_dir = scratch_dir.empty() ? (root / "rerun").string() : scratch_dir;
        o.workers = workers;
        const auto res = run_experiment(cfg, o);
        std::map<std::string, std::string> fresh;
        for (const auto& f : res.files) fresh[f.path] = hex64(f.hash);
        for (const auto& f : m.at("files")) {
            const auto rel = f.at("path").get<std::string>();
            const auto it = fresh.find(rel);
            if (it == fresh.end())
                check.problems.push_back("rerun did not produce " + rel);
            else if (it->second != f.at("fnv1a64").get<std::string>())
                check.problems.push_back("rerun differs for " + rel);
        }
    }
    check.ok = check.problems.empty();
    return check;
}

} // namespace prethermal
