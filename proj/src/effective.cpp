#include "prethermal/effective.hpp"

#include <cmath>

namespace prethermal {

StaticHamiltonian rotate_hamiltonian(const StaticHamiltonian& h, const Mat3& r)
{
    StaticHamiltonian out;
    out.prefactor = h.prefactor;
    const Mat3 rt = transpose(r);
    for (const auto& p : h.pairs) out.pairs.push_back({p.shape, rt * p.tensor * r});
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int a2 = 0; a2 < 3; ++a2)
                    for (int b2 = 0; b2 < 3; ++b2)
                        for (int c2 = 0; c2 < 3; ++c2)
                            acc += h.triple(a2, b2, c2) * r(a2, a) * r(b2, b) * r(c2, c);
                out.triple(a, b, c) = acc;
            }
    out.field = rt * h.field;
    return out;
}

StaticHamiltonian project_symmetric(const StaticHamiltonian& h, const KickSpec& kick)
{
    const int m_order = kick.order();
    const StaticHamiltonian base = h.normalized();
    StaticHamiltonian out;
    const double w = 1.0 / static_cast<double>(m_order);
    for (int m = 0; m < m_order; ++m) {
        const StaticHamiltonian rotated = rotate_hamiltonian(base, kick.matrix(m));
        for (const auto& p : rotated.pairs) out.add_pair(p.shape, p.tensor * w);
        for (int i = 0; i < 27; ++i) out.triple.a[i] += w * rotated.triple.a[i];
        out.field += rotated.field * w;
    }
    out.prune(1e-14);
    return out;
}

StaticHamiltonian build_effective(const DriveProtocol& protocol)
{
    protocol.validate();
    StaticHamiltonian avg;
    for (const auto& s : protocol.segments) avg.add(s.terms, s.duration / protocol.period);
    if (!protocol.kick || protocol.kick->order() == 1) {
        avg.prune(1e-14);
        return avg;
    }
    return project_symmetric(avg, *protocol.kick);
}

bool verify_emergent_symmetry(const StaticHamiltonian& d, const KickSpec& kick, const LatticeSpec& lattice,
                              std::size_t n_states, std::uint64_t seed, double tolerance)
{
    const CompiledModel model(d, lattice);
    const Mat3 r = kick.matrix();
    Rng rng(seed);
    std::vector<Vec3> rotated(lattice.size());
    for (std::size_t k = 0; k < n_states; ++k) {
        const SpinState s = SpinState::random(lattice, rng);
        for (std::size_t i = 0; i < s.size(); ++i) rotated[i] = r * s.spins[i];
        if (std::abs(model.energy(rotated) - model.energy(s.spins)) > tolerance) return false;
    }
    return true;
}

Rk4Integrator::Rk4Integrator(const StaticHamiltonian& d, const LatticeSpec& lattice)
    : model_(d, lattice)
{
    const std::size_t n = lattice.size();
    k1_.resize(n);
    k2_.resize(n);
    k3_.resize(n);
    k4_.resize(n);
    tmp_.resize(n);
    fields_.resize(n);
}

void Rk4Integrator::derivative(std::span<const Vec3> s, std::span<Vec3> out)
{
    model_.fields(s, fields_);
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = cross(fields_[i], s[i]);
}

double Rk4Integrator::step_unnormalized(std::span<Vec3> s, double dt)
{
    const std::size_t n = s.size();
    derivative(s, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = s[i] + k1_[i] * (0.5 * dt);
    derivative(tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = s[i] + k2_[i] * (0.5 * dt);
    derivative(tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = s[i] + k3_[i] * dt;
    derivative(tmp_, k4_);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s[i] += (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]) * (dt / 6.0);
        worst = std::max(worst, std::abs(norm(s[i]) - 1.0));
    }
    return worst;
}

void Rk4Integrator::step(std::span<Vec3> s, double dt)
{
    step_unnormalized(s, dt);
    for (auto& v : s) v = normalized(v);
}

SpinState rk4_step(const SpinState& state, const StaticHamiltonian& d, double dt)
{
    if (!(dt > 0.0)) throw ContractError("rk4 step size must be positive");
    state.validate();
    Rk4Integrator integ(d, state.lattice);
    SpinState out = state;
    integ.step(out.spins, dt);
    return out;
}

EffectiveRun evolve_under_d(const SpinState& initial, const StaticHamiltonian& d, double total_time, double dt,
                            double period, const RecordSpec& spec)
{
    if (!(total_time > 0.0)) throw ContractError("total_time must be positive");
    if (!(dt > 0.0) || dt > total_time) throw ContractError("dt must satisfy 0 < dt <= total_time");
    if (!(period > 0.0)) throw ContractError("sampling period must be positive");
    if (spec.stride < 1) throw ContractError("record stride must be >= 1");
    initial.validate();

    const auto steps = static_cast<std::int64_t>(std::ceil(period / dt - 1e-9));
    const double h = period / static_cast<double>(steps);
    const auto n_cycles = static_cast<std::int64_t>(std::floor(total_time / period + 1e-9));

    Rk4Integrator integ(d, initial.lattice);
    EffectiveRun out{{}, initial, h, steps};
    auto& rec = out.record;
    rec.period = period;
    auto& spins = out.final_state.spins;

    auto sample = [&](std::int64_t cycle) {
        const auto c = static_cast<std::size_t>(cycle);
        if (c % spec.stride == 0) {
            rec.cycles.push_back(cycle);
            rec.times.push_back(static_cast<double>(cycle) * period);
            Vec3 m;
            for (const auto& v : spins) m += v;
            rec.magnetization.push_back(m * (1.0 / static_cast<double>(spins.size())));
            rec.energy_density.push_back(integ.model().energy_density(spins));
        }
        if (spec.snapshot_stride && c % spec.snapshot_stride == 0) {
            rec.snapshot_cycles.push_back(cycle);
            rec.snapshots.push_back(spins);
        }
    };

    sample(0);
    for (std::int64_t m = 1; m <= n_cycles; ++m) {
        for (std::int64_t k = 0; k < steps; ++k) integ.step(spins, h);
        sample(m);
    }
    const double rest = total_time - static_cast<double>(n_cycles) * period;
    if (rest > 1e-12 * period) {
        const auto k_rest = static_cast<std::int64_t>(std::ceil(rest / h - 1e-9));
        for (std::int64_t k = 0; k < k_rest; ++k) integ.step(spins, rest / static_cast<double>(k_rest));
    }
    return out;
}

} // namespace prethermal
