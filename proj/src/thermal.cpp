#include "prethermal/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "prethermal/parallel.hpp"

namespace prethermal {

void McConfig::validate() const
{
    if (n_equil < 1 || n_meas < 1 || n_runs < 1) throw ContractError("Monte Carlo counts must be >= 1");
    if (!(beta >= 0.0)) throw ContractError("beta must be >= 0");
    if (measure_every < 1) throw ContractError("measure_every must be >= 1");
    if (cone_angle < 0.0) throw ContractError("cone_angle must be >= 0");
}

const char* to_string(LocalObservable k)
{
    switch (k) {
    case LocalObservable::SiteSz: return "site-sz";
    case LocalObservable::BondSzSz: return "bond-szsz";
    case LocalObservable::BondEnergy: return "bond-energy";
    default: return "triple-energy";
    }
}

LocalObservable local_observable_from_string(const std::string& s)
{
    if (s == "site-sz") return LocalObservable::SiteSz;
    if (s == "bond-szsz") return LocalObservable::BondSzSz;
    if (s == "bond-energy") return LocalObservable::BondEnergy;
    if (s == "triple-energy") return LocalObservable::TripleEnergy;
    throw ContractError("unknown local observable '" + s + "'");
}

MetropolisChain::MetropolisChain(const CompiledModel& model, SpinState state, Rng rng)
    : model_(&model), state_(std::move(state)), rng_(std::move(rng))
{
    if (state_.size() != model.size()) throw ContractError("state does not match the model lattice");
    resync();
}

void MetropolisChain::resync()
{
    energy_ = model_->energy(state_.spins);
    mag_ = Vec3{};
    for (const auto& s : state_.spins) mag_ += s;
}

Vec3 MetropolisChain::propose(const Vec3& current, double cone_angle)
{
    if (cone_angle <= 0.0 || cone_angle >= M_PI) return rng_.unit_vector();
    // Uniform on the spherical cap of half-angle cone_angle around `current`.
    const double cos_min = std::cos(cone_angle);
    const double ct = 1.0 - rng_.uniform() * (1.0 - cos_min);
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    const double phi = 2.0 * M_PI * rng_.uniform();
    const Vec3 helper = std::abs(current.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const Vec3 e1 = normalized(cross(current, helper));
    const Vec3 e2 = cross(current, e1);
    return normalized(current * ct + (e1 * std::cos(phi) + e2 * std::sin(phi)) * st);
}

std::size_t MetropolisChain::sweep(double beta, double cone_angle)
{
    const std::size_t n = state_.size();
    std::size_t accepted = 0;
    auto& spins = state_.spins;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = rng_.below(n);
        const Vec3 proposal = propose(spins[i], cone_angle);
        // Energy is linear in each single spin, so the local field gives dE exactly.
        const Vec3 b = model_->local_field(spins, i);
        const double de = dot(b, proposal - spins[i]);
        const double u = rng_.uniform();
        if (de <= 0.0 || u < std::exp(-beta * de)) {
            mag_ += proposal - spins[i];
            spins[i] = proposal;
            energy_ += de;
            ++accepted;
        }
    }
    return accepted;
}

SpinState metropolis_step(const SpinState& state, const StaticHamiltonian& d, double beta, Rng& rng)
{
    if (!(beta >= 0.0)) throw ContractError("beta must be >= 0");
    state.validate();
    const CompiledModel model(d, state.lattice);
    MetropolisChain chain(model, state, Rng(rng.next_u64()));
    chain.sweep(beta);
    return chain.state();
}

std::vector<double> local_observable_samples(const CompiledModel& model, const std::vector<Vec3>& s,
                                             LocalObservable kind)
{
    const auto& lat = model.lattice();
    std::vector<double> out;
    switch (kind) {
    case LocalObservable::SiteSz:
        out.reserve(s.size());
        for (const auto& v : s) out.push_back(v.z);
        break;
    case LocalObservable::BondSzSz:
        for (const auto& [i, j] : lat.bonds()) out.push_back(s[i].z * s[j].z);
        break;
    case LocalObservable::BondEnergy:
        for (const auto& b : lat.bonds()) out.push_back(model.cluster_energy(s, b));
        break;
    case LocalObservable::TripleEnergy:
        for (const auto& t : lat.triples()) out.push_back(model.cluster_energy(s, t));
        break;
    }
    return out;
}

namespace {

Estimate across_runs(const std::vector<RunStats>& runs, double RunStats::*field)
{
    Estimate e;
    const double n = static_cast<double>(runs.size());
    for (const auto& r : runs) e.mean += r.*field;
    e.mean /= n;
    if (runs.size() > 1) {
        double var = 0.0;
        for (const auto& r : runs) var += (r.*field - e.mean) * (r.*field - e.mean);
        var /= (n - 1.0);
        e.error = std::sqrt(var / n);
    }
    return e;
}

} // namespace

EnsembleStats sample_ensemble(const LatticeSpec& lattice, const StaticHamiltonian& d, const McConfig& mc,
                              const SampleOptions& opts)
{
    mc.validate();
    lattice.validate();
    const CompiledModel model(d, lattice);
    const std::size_t n = lattice.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<RunStats> runs(static_cast<std::size_t>(mc.n_runs));
    std::vector<std::vector<std::vector<double>>> locals(runs.size(),
                                                          std::vector<std::vector<double>>(opts.local_kinds.size()));

    parallel_for(runs.size(), mc.workers, [&](std::size_t r) {
        Rng rng = Rng::stream(mc.seed, r);
        SpinState init = SpinState::random(lattice, rng);
        MetropolisChain chain(model, std::move(init), Rng(rng.next_u64()));
        for (std::int64_t k = 0; k < mc.n_equil; ++k) chain.sweep(mc.beta, mc.cone_angle);
        chain.resync();

        RunStats st;
        std::size_t samples = 0, accepted = 0;
        for (std::int64_t k = 1; k <= mc.n_meas; ++k) {
            accepted += chain.sweep(mc.beta, mc.cone_angle);
            if (k % 1000 == 0) chain.resync();
            if (k % mc.measure_every == 0) {
                const double m = chain.magnetization_sum().z * inv_n;
                const double m2 = m * m;
                st.sz += m;
                st.abs_sz += std::abs(m);
                st.sz2 += m2;
                st.sz4 += m2 * m2;
                const double e = chain.energy() * inv_n;
                st.energy_density += e;
                st.energy_density2 += e * e;
                ++samples;
            }
            if (!opts.local_kinds.empty() && k % opts.local_every == 0) {
                for (std::size_t q = 0; q < opts.local_kinds.size(); ++q) {
                    auto v = local_observable_samples(model, chain.state().spins, opts.local_kinds[q]);
                    locals[r][q].insert(locals[r][q].end(), v.begin(), v.end());
                }
            }
        }
        const double inv = 1.0 / static_cast<double>(samples);
        st.sz *= inv;
        st.abs_sz *= inv;
        st.sz2 *= inv;
        st.sz4 *= inv;
        st.energy_density *= inv;
        st.energy_density2 *= inv;
        st.acceptance = static_cast<double>(accepted) / (static_cast<double>(mc.n_meas) * static_cast<double>(n));
        runs[r] = st;
    });

    EnsembleStats out;
    out.beta = mc.beta;
    out.n_sites = n;
    out.runs = runs;
    out.sz = across_runs(runs, &RunStats::sz);
    out.abs_sz = across_runs(runs, &RunStats::abs_sz);
    out.sz2 = across_runs(runs, &RunStats::sz2);
    out.sz4 = across_runs(runs, &RunStats::sz4);
    out.energy_density = across_runs(runs, &RunStats::energy_density);
    out.binder = out.sz2.mean > 0.0 ? 1.0 - out.sz4.mean / (3.0 * out.sz2.mean * out.sz2.mean) : 0.0;
    out.local_kinds = opts.local_kinds;
    out.local_samples.resize(opts.local_kinds.size());
    for (std::size_t q = 0; q < opts.local_kinds.size(); ++q)
        for (const auto& per_run : locals) out.local_samples[q].insert(out.local_samples[q].end(), per_run[q].begin(),
                                                                        per_run[q].end());
    return out;
}

SweepCurves temperature_sweep(const std::vector<LatticeSpec>& lattices, const StaticHamiltonian& d,
                              const std::vector<double>& betas, const McConfig& mc)
{
    if (betas.empty()) throw ContractError("temperature sweep needs at least one beta");
    for (double b : betas)
        if (!(b > 0.0)) throw ContractError("temperature sweep betas must be > 0");
    SweepCurves out;
    for (std::size_t li = 0; li < lattices.size(); ++li) {
        SweepCurve curve{lattices[li], {}};
        for (std::size_t bi = 0; bi < betas.size(); ++bi) {
            McConfig c = mc;
            c.beta = betas[bi];
            c.seed = splitmix64(mc.seed ^ splitmix64((static_cast<std::uint64_t>(lattices[li].size()) << 20) + bi));
            curve.points.push_back({1.0 / betas[bi], sample_ensemble(lattices[li], d, c)});
        }
        std::sort(curve.points.begin(), curve.points.end(),
                  [](const SweepPoint& a, const SweepPoint& b) { return a.temperature < b.temperature; });
        out.curves.push_back(std::move(curve));
    }
    return out;
}

namespace {

struct Series {
    std::vector<double> t, value, error;
};

double binder_error(const EnsembleStats& s)
{
    // First-order propagation of the run-to-run errors of <m^2> and <m^4>.
    const double m2 = s.sz2.mean, m4 = s.sz4.mean;
    if (m2 <= 0.0) return 0.0;
    const double d4 = 1.0 / (3.0 * m2 * m2);
    const double d2 = 2.0 * m4 / (3.0 * m2 * m2 * m2);
    return std::sqrt(d4 * d4 * s.sz4.error * s.sz4.error + d2 * d2 * s.sz2.error * s.sz2.error);
}

Series extract(const SweepCurve& c, CrossingQuantity q)
{
    Series s;
    for (const auto& p : c.points) {
        s.t.push_back(p.temperature);
        if (q == CrossingQuantity::OrderParameter) {
            s.value.push_back(p.stats.sz2.mean);
            s.error.push_back(p.stats.sz2.error);
        } else {
            s.value.push_back(p.stats.binder);
            s.error.push_back(binder_error(p.stats));
        }
    }
    return s;
}

double interpolate(const std::vector<double>& x, const std::vector<double>& y, double at)
{
    if (at <= x.front()) return y.front();
    if (at >= x.back()) return y.back();
    const auto it = std::upper_bound(x.begin(), x.end(), at);
    const std::size_t k = static_cast<std::size_t>(it - x.begin());
    const double f = (at - x[k - 1]) / (x[k] - x[k - 1]);
    return y[k - 1] + f * (y[k] - y[k - 1]);
}

} // namespace

CriticalPoint estimate_critical(const SweepCurves& curves, CrossingQuantity quantity)
{
    if (curves.curves.size() < 2) throw ContractError("critical-point estimate needs curves for >= 2 sizes");
    CriticalPoint cp;
    for (const auto& c : curves.curves) cp.sizes.push_back(c.lattice.size());

    for (std::size_t a = 0; a < curves.curves.size(); ++a) {
        for (std::size_t b = a + 1; b < curves.curves.size(); ++b) {
            const Series sa = extract(curves.curves[a], quantity);
            const Series sb = extract(curves.curves[b], quantity);
            if (sa.t != sb.t) throw ContractError("curves must share the temperature grid");
            const bool b_larger = curves.curves[b].lattice.size() > curves.curves[a].lattice.size();
            // diff > 0 where the larger system is more ordered.
            std::vector<double> diff(sa.t.size());
            std::vector<int> sig(sa.t.size());
            for (std::size_t k = 0; k < diff.size(); ++k) {
                diff[k] = (sb.value[k] - sa.value[k]) * (b_larger ? 1.0 : -1.0);
                const double err = std::hypot(sa.error[k], sb.error[k]);
                sig[k] = diff[k] > err ? 1 : (diff[k] < -err ? -1 : 0);
            }
            // First significantly ordered point followed (at higher T) by a significantly disordered one.
            std::optional<std::size_t> last_pos;
            for (std::size_t k = 0; k < diff.size(); ++k) {
                if (sig[k] > 0) last_pos = k;
                if (sig[k] < 0 && last_pos) {
                    std::size_t z = *last_pos;
                    while (z + 1 < k && diff[z + 1] > 0.0) ++z;
                    const double t0 = sa.t[z], t1 = sa.t[z + 1];
                    const double f = diff[z] / (diff[z] - diff[z + 1]);
                    cp.crossings.push_back({cp.sizes[a], cp.sizes[b], t0 + f * (t1 - t0)});
                    break;
                }
            }
        }
    }
    if (cp.crossings.empty()) {
        cp.diagnostic = "no transition detected in the sampled temperature range";
        return cp;
    }
    cp.detected = true;
    double mean = 0.0;
    for (const auto& c : cp.crossings) mean += c.temperature;
    mean /= static_cast<double>(cp.crossings.size());
    double spread = 0.0;
    for (const auto& c : cp.crossings) spread = std::max(spread, std::abs(c.temperature - mean));
    cp.T_c = mean;

    // Largest system's e(T).
    const auto largest = std::max_element(curves.curves.begin(), curves.curves.end(), [](const auto& l, const auto& r) {
        return l.lattice.size() < r.lattice.size();
    });
    std::vector<double> t, e;
    for (const auto& p : largest->points) {
        t.push_back(p.temperature);
        e.push_back(p.stats.energy_density.mean);
    }
    // Spacing of the grid bounds the resolution when only one crossing exists.
    double grid = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k)
        if (t[k - 1] <= mean && mean <= t[k]) grid = 0.5 * (t[k] - t[k - 1]);
    cp.T_c_error = cp.crossings.size() > 1 ? std::max(spread, 0.0) : grid;
    cp.epsilon_c = interpolate(t, e, cp.T_c);
    cp.epsilon_c_error = 0.5 * std::abs(interpolate(t, e, cp.T_c + cp.T_c_error) - interpolate(t, e, cp.T_c - cp.T_c_error));
    cp.diagnostic = std::to_string(cp.crossings.size()) + " pairwise crossing(s)";
    return cp;
}

SpinState ground_state_estimate(const CompiledModel& model, Rng& rng, int restarts)
{
    const auto& lat = model.lattice();
    std::vector<SpinState> starts;
    for (const Vec3 dir : {Vec3{0, 0, 1}, Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, -1}, Vec3{-1, 0, 0}})
        starts.push_back(SpinState::polarized(lat, dir));
    for (int r = 0; r < restarts; ++r) starts.push_back(SpinState::random(lat, rng));

    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    for (std::size_t k = 0; k < starts.size(); ++k) {
        auto& s = starts[k];
        double e = model.energy(s.spins);
        for (int sweep = 0; sweep < 500; ++sweep) {
            for (std::size_t i = 0; i < s.size(); ++i) {
                const Vec3 b = model.local_field(s.spins, i);
                const double nb = norm(b);
                if (nb > 0.0) s.spins[i] = b * (-1.0 / nb);
            }
            const double e_new = model.energy(s.spins);
            const bool done = e - e_new < 1e-12 * static_cast<double>(s.size());
            e = e_new;
            if (done) break;
        }
        if (e < best) {
            best = e;
            best_index = k;
        }
    }
    return starts[best_index];
}

double ground_energy_estimate(const CompiledModel& model, Rng& rng, int restarts)
{
    return model.energy_density(ground_state_estimate(model, rng, restarts).spins);
}

EnergyTargetResult sample_at_energy(const LatticeSpec& lattice, const StaticHamiltonian& d, double target_eps,
                                    std::uint64_t seed, const EnergyTargetOptions& opts)
{
    lattice.validate();
    const CompiledModel model(d, lattice);
    Rng rng = Rng::stream(seed, 0);

    EnergyTargetResult out;
    const SpinState ground = ground_state_estimate(model, rng);
    out.e_min = model.energy_density(ground.spins);
    out.e_max = 0.0;  // every term has zero mean over independent uniform spins
    out.tolerance = opts.tolerance_fraction * (out.e_max - out.e_min);
    if (target_eps < out.e_min - out.tolerance || target_eps > out.e_max + out.tolerance)
        throw ContractError("target energy density " + std::to_string(target_eps) + " outside reachable range [" +
                            std::to_string(out.e_min) + ", " + std::to_string(out.e_max) + "]");

    // Starting from the quenched state avoids metastable domain configurations at low temperature.
    MetropolisChain chain(model, ground, Rng(rng.next_u64()));
    // Proposal cap tuned towards ~40% acceptance while equilibrating, then frozen for measurement.
    double cone = M_PI;
    const double n_sites = static_cast<double>(lattice.size());
    auto equilibrate = [&](double beta, std::int64_t sweeps) {
        for (std::int64_t k = 0; k < sweeps; ++k) {
            const double rate = static_cast<double>(chain.sweep(beta, cone)) / n_sites;
            if (opts.adaptive_cone) cone = std::clamp(cone * (0.6 + rate), 1e-3, M_PI);
        }
        chain.resync();
    };
    auto mean_eps = [&](double beta) {
        const std::int64_t half = std::max<std::int64_t>(opts.bisection_sweeps / 2, 1);
        equilibrate(beta, half);
        double acc = 0.0;
        for (std::int64_t k = 0; k < half; ++k) {
            chain.sweep(beta, cone);
            acc += chain.energy();
        }
        return acc / static_cast<double>(half * static_cast<std::int64_t>(lattice.size()));
    };

    double beta = 0.0;
    if (std::abs(target_eps - out.e_max) > out.tolerance) {
        double lo = 0.0, hi = 1.0 / std::max(out.e_max - out.e_min, 1e-12);
        int guard = 0;
        while (mean_eps(hi) > target_eps && guard++ < 30) {
            lo = hi;
            hi *= 2.0;
        }
        beta = hi;
        // Chain averages are noisy, so the bracket is narrowed fully instead of stopping at the
        // first estimate that happens to fall inside the tolerance.
        for (int it = 0; it < opts.max_bisections && hi - lo > 1e-3 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (mean_eps(mid) > target_eps ? lo : hi) = mid;
        }
        beta = 0.5 * (lo + hi);
    }
    out.beta = beta;

    equilibrate(beta, opts.equil_sweeps);
    const double inv_n = 1.0 / static_cast<double>(lattice.size());
    std::int64_t used = 0;
    constexpr int batch = 20;
    double sum = 0.0, sum2 = 0.0;
    int in_batch = 0;
    while (out.states.size() < opts.n_states) {
        for (std::int64_t k = 0; k < opts.spacing; ++k) chain.sweep(beta, cone);
        used += opts.spacing;
        if (used % 1000 < opts.spacing) chain.resync();
        const double e = chain.energy() * inv_n;
        if (std::abs(e - target_eps) < out.tolerance) out.states.push_back(chain.state());
        sum += e;
        sum2 += e * e;
        if (++in_batch == batch) {
            // Damped Newton step on beta using d<E>/d(beta) = -Var(E).
            const double mean = sum / batch;
            const double var_total = std::max(sum2 / batch - mean * mean, 0.0) * n_sites * n_sites;
            if (std::abs(mean - target_eps) > out.tolerance && var_total > 0.0)
                beta = std::max(0.0, beta + 0.5 * (mean - target_eps) * n_sites / var_total);
            sum = sum2 = 0.0;
            in_batch = 0;
        }
        if (used > opts.max_sweeps)
            throw std::runtime_error("sample_at_energy: collected " + std::to_string(out.states.size()) + " of " +
                                     std::to_string(opts.n_states) + " snapshots within the sweep budget");
    }
    return out;
}

MatchedEnsemble canonical_at_energy(const LatticeSpec& lattice, const StaticHamiltonian& d, double eps, McConfig mc,
                                    const SampleOptions& opts, int max_refinements)
{
    EnergyTargetOptions target;
    target.n_states = 1;
    MatchedEnsemble out;
    out.beta = sample_at_energy(lattice, d, eps, splitmix64(mc.seed ^ 0x6D617463ULL), target).beta;
    const double n_sites = static_cast<double>(lattice.size());
    for (int it = 0;; ++it) {
        mc.beta = out.beta;
        out.stats = sample_ensemble(lattice, d, mc, opts);
        out.refinements = it;
        const Estimate& e = out.stats.energy_density;
        if (it >= max_refinements || std::abs(e.mean - eps) <= 2.0 * e.error) break;
        // Newton step with d<e>/d(beta) = -N Var(e), the variance averaged over runs.
        double var = 0.0;
        for (const RunStats& r : out.stats.runs) var += r.energy_density2 - r.energy_density * r.energy_density;
        var /= static_cast<double>(out.stats.runs.size());
        if (var <= 0.0) break;
        out.beta = std::max(0.0, out.beta + (e.mean - eps) / (n_sites * var));
    }
    return out;
}

} // namespace prethermal
