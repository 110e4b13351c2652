#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "prethermal/model.hpp"
#include "prethermal/thermal.hpp"

using namespace prethermal;

namespace {

StaticHamiltonian field_only(double hz)
{
    StaticHamiltonian h;
    h.field = {0.0, 0.0, hz};
    return h;
}

StaticHamiltonian ising_like()
{
    StaticHamiltonian h;
    Mat3 t;
    t(2, 2) = -1.0;
    t(0, 0) = 0.3;
    h.add_pair({KernelKind::NearestNeighbor, 0.0, {}}, t);
    h.field = {0.2, 0.0, 0.0};
    return h;
}

} // namespace

TEST_CASE("free spins in a field follow the Langevin function")
{
    const auto lat = LatticeSpec::chain(8, Boundary::Open);
    for (double bh : {0.5, 2.0}) {
        McConfig mc;
        mc.n_equil = 200;
        mc.n_meas = 4000;
        mc.n_runs = 6;
        mc.beta = bh;
        mc.seed = 9;
        const auto st = sample_ensemble(lat, field_only(-1.0), mc);
        CHECK(std::abs(st.sz.mean - oracle::langevin(bh)) < 4.0 * st.sz.error + 1e-3);
    }
}

TEST_CASE("infinite temperature moments")
{
    const auto lat = LatticeSpec::chain(16);
    McConfig mc;
    mc.n_equil = 10;
    mc.n_meas = 2000;
    mc.n_runs = 6;
    mc.beta = 0.0;
    const auto st = sample_ensemble(lat, ising_like(), mc);
    // magnetisation per site of 16 independent spins: <m^2> = 1/(3N)
    CHECK(std::abs(st.sz.mean) < 4.0 * st.sz.error + 1e-3);
    CHECK(st.sz2.mean == doctest::Approx(1.0 / 48.0).epsilon(0.1));
    CHECK(std::abs(st.energy_density.mean) < 4.0 * st.energy_density.error + 1e-3);
}

TEST_CASE("chain bookkeeping matches recomputation")
{
    const auto lat = LatticeSpec::chain(12, Boundary::Periodic);
    const auto h = ising_like();
    const CompiledModel model(h, lat);
    Rng rng(4);
    MetropolisChain chain(model, SpinState::random(lat, rng), Rng(5));
    for (int k = 0; k < 50; ++k) chain.sweep(1.5, k % 2 ? 0.3 : 0.0);
    CHECK(chain.energy() == doctest::Approx(model.energy(chain.state().spins)).epsilon(1e-10));
    const Vec3 m = chain.state().magnetization() * 12.0;
    CHECK(norm(chain.magnetization_sum() - m) < 1e-10);
    CHECK(chain.state().max_norm_error() < 1e-12);
}

TEST_CASE("infinite beta sweeps never raise the energy")
{
    const auto lat = LatticeSpec::chain(10, Boundary::Open);
    const CompiledModel model(ising_like(), lat);
    Rng rng(6);
    MetropolisChain chain(model, SpinState::random(lat, rng), Rng(7));
    double prev = chain.energy();
    for (int k = 0; k < 30; ++k) {
        chain.sweep(1e12, 0.2);
        CHECK(chain.energy() <= prev + 1e-12);
        prev = chain.energy();
    }
}

TEST_CASE("ground state of the ferromagnetic chain")
{
    const auto lat = LatticeSpec::chain(20, Boundary::Periodic);
    StaticHamiltonian h;
    Mat3 t;
    t(2, 2) = -1.0;
    h.add_pair({KernelKind::NearestNeighbor, 0.0, {}}, t);
    const CompiledModel model(h, lat);
    Rng rng(8);
    CHECK(ground_energy_estimate(model, rng) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("energy targeting lands within tolerance")
{
    const auto lat = LatticeSpec::chain(40, Boundary::Open);
    const auto h = ising_like();
    const CompiledModel model(h, lat);
    EnergyTargetOptions o;
    o.n_states = 4;
    const auto r = sample_at_energy(lat, h, -0.4, 3, o);
    REQUIRE(r.states.size() == 4);
    CHECK(r.e_min < -0.4);
    CHECK(r.beta > 0.0);
    for (const auto& s : r.states) CHECK(std::abs(model.energy_density(s.spins) + 0.4) <= r.tolerance + 1e-12);
    CHECK_THROWS(sample_at_energy(lat, h, -50.0, 3, o));
}

TEST_CASE("canonical statistics at matched energy")
{
    const auto lat = LatticeSpec::chain(40, Boundary::Open);
    McConfig mc;
    mc.n_equil = 300;
    mc.n_meas = 1500;
    mc.n_runs = 4;
    const auto m = canonical_at_energy(lat, ising_like(), -0.3, mc);
    CHECK(m.beta > 0.0);
    CHECK(std::abs(m.stats.energy_density.mean + 0.3) < 0.02);
    // Refinement stops once the energy agrees within two standard errors, or at the cap.
    const auto& e = m.stats.energy_density;
    CHECK((std::abs(e.mean + 0.3) <= 2.0 * e.error || m.refinements == 4));

    const auto raw = canonical_at_energy(lat, ising_like(), -0.3, mc, {}, 0);
    CHECK(raw.refinements == 0);
    for (const auto& r : m.stats.runs) CHECK(r.energy_density2 >= r.energy_density * r.energy_density);
}

TEST_CASE("local observable samples")
{
    const auto lat = LatticeSpec::chain(6, Boundary::Periodic);
    auto h = ising_like();
    h.triple(2, 2, 2) = 0.5;
    const CompiledModel model(h, lat);
    const auto s = SpinState::polarized(lat, {0, 0, 1});
    const auto sz = local_observable_samples(model, s.spins, LocalObservable::SiteSz);
    CHECK(sz.size() == 6);
    for (double v : sz) CHECK(v == doctest::Approx(1.0));
    const auto bond = local_observable_samples(model, s.spins, LocalObservable::BondSzSz);
    CHECK(bond.size() == 6);
    const auto tri = local_observable_samples(model, s.spins, LocalObservable::TripleEnergy);
    CHECK(tri.size() == 6);
    // two zz bonds of -1, the triple of 0.5, and a field orthogonal to the spins
    for (double v : tri) CHECK(v == doctest::Approx(-1.5));
    for (auto k : {LocalObservable::SiteSz, LocalObservable::BondSzSz, LocalObservable::BondEnergy, LocalObservable::TripleEnergy})
        CHECK(local_observable_from_string(to_string(k)) == k);
}

TEST_CASE("crossing analysis on synthetic curves")
{
    // Two sizes whose order parameter curves cross at T = 0.5.
    SweepCurves c;
    for (int L : {10, 20}) {
        SweepCurve cur;
        cur.lattice = LatticeSpec::chain(L);
        for (double T : {0.3, 0.4, 0.6, 0.7}) {
            SweepPoint p;
            p.temperature = T;
            const double slope = L == 10 ? -1.0 : -2.0;
            p.stats.abs_sz = {0.5 + slope * (T - 0.5), 1e-4};
            p.stats.sz2 = {0.5 + slope * (T - 0.5), 1e-4};
            p.stats.energy_density = {-1.0 + T, 1e-4};
            p.stats.binder = 0.5 + slope * (T - 0.5);
            cur.points.push_back(p);
        }
        c.curves.push_back(cur);
    }
    const auto cp = estimate_critical(c, CrossingQuantity::OrderParameter);
    REQUIRE(cp.detected);
    CHECK(cp.T_c == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(cp.epsilon_c == doctest::Approx(-0.5).epsilon(1e-9));
    const auto cb = estimate_critical(c, CrossingQuantity::Binder);
    CHECK(cb.detected);

    // Parallel curves never cross.
    for (auto& p : c.curves[1].points) {
        p.stats.abs_sz.mean += 1.0;
        p.stats.sz2.mean += 1.0;
        p.stats.binder += 1.0;
    }
    CHECK_FALSE(estimate_critical(c, CrossingQuantity::OrderParameter).detected);
}

TEST_CASE("mc config validation")
{
    McConfig mc;
    CHECK_NOTHROW(mc.validate());
    mc.n_runs = 0;
    CHECK_THROWS_AS(mc.validate(), ContractError);
}

TEST_CASE("sampling does not depend on the worker count")
{
    const auto lat = LatticeSpec::chain(16, Boundary::Open);
    McConfig mc;
    mc.n_equil = 50;
    mc.n_meas = 100;
    mc.n_runs = 4;
    mc.beta = 1.0;
    const auto a = sample_ensemble(lat, ising_like(), mc);
    mc.workers = 3;
    const auto b = sample_ensemble(lat, ising_like(), mc);
    CHECK(a.sz.mean == b.sz.mean);
    CHECK(a.energy_density.mean == b.energy_density.mean);
    CHECK(a.binder == b.binder);
}
