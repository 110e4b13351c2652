#include <doctest.h>

#include <cmath>

#include "prethermal/analysis.hpp"
#include "prethermal/drive.hpp"
#include "prethermal/effective.hpp"
#include "prethermal/model.hpp"

using namespace prethermal;

TEST_CASE("delta M is zero for identical states and bounded by two")
{
    Rng rng(1);
    const auto lat = LatticeSpec::chain(30);
    for (int t = 0; t < 20; ++t) {
        const auto a = SpinState::random(lat, rng), b = SpinState::random(lat, rng);
        const double d = delta_m(a.spins, b.spins);
        CHECK(d >= 0.0);
        CHECK(d <= 2.0);
        CHECK(delta_m(a.spins, a.spins) == doctest::Approx(0.0).epsilon(1e-15));
        std::vector<Vec3> neg(a.spins.size());
        for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -a.spins[i];
        CHECK(delta_m(a.spins, neg) == doctest::Approx(2.0));
    }
    CHECK_THROWS_AS(delta_m(std::vector<Vec3>(2), std::vector<Vec3>(3)), ContractError);
}

TEST_CASE("toggling frame undoes the kicks of a pure-kick drive")
{
    DriveParameters p;  // all couplings zero: only the kick acts
    const KickSpec kick(Axis::X, 1, 3);
    const auto proto = three_window_protocol(p, 2.0, kick);
    const auto lat = LatticeSpec::chain(4);
    Rng rng(2);
    const auto s0 = SpinState::random(lat, rng);
    const auto rec = run_trajectory(s0, proto, 9, RecordSpec{1, 2}).record;
    const auto tog = toggling_frame(rec, kick);
    for (const auto& m : tog.magnetization) CHECK(norm(m - s0.magnetization()) < 1e-13);
    for (const auto& snap : tog.snapshots)
        for (std::size_t i = 0; i < snap.size(); ++i) CHECK(norm(snap[i] - s0.spins[i]) < 1e-13);
}

TEST_CASE("sector alignment picks the kick power closest to +z")
{
    const KickSpec kick(Axis::X, 1, 2);
    const auto lat = LatticeSpec::chain(3);
    const auto down = SpinState::polarized(lat, {0.0, 0.3, -1.0});
    const auto up = align_to_sector(down, kick);
    CHECK(up.magnetization().z > 0.0);
    const auto already = SpinState::polarized(lat, {0.0, 0.0, 1.0});
    CHECK(norm(align_to_sector(already, kick).spins[0] - already.spins[0]) < 1e-15);
}

TEST_CASE("spectrum of a pure subharmonic")
{
    std::vector<double> x(400);
    for (std::size_t n = 0; n < x.size(); ++n) x[n] = 0.7 * std::cos(2.0 * M_PI * n / 3.0) + 0.2;
    const auto s = subharmonic_spectrum(x, 0, x.size());
    REQUIRE_FALSE(s.peaks.empty());
    CHECK(s.peaks.front().frequency == doctest::Approx(1.0 / 3.0).epsilon(3e-3));
    // 400 is not a multiple of 3; on-bin series give the exact amplitude
    const auto s2 = subharmonic_spectrum(x, 0, 399);
    CHECK(s2.amplitude_at(1.0 / 3.0) == doctest::Approx(0.7).epsilon(1e-9));
    std::vector<double> alt(128);
    for (std::size_t n = 0; n < alt.size(); ++n) alt[n] = (n % 2 ? -0.4 : 0.4);
    const auto s3 = subharmonic_spectrum(alt, 0, alt.size());
    CHECK(s3.peaks.front().frequency == doctest::Approx(0.5));
    CHECK(s3.peaks.front().amplitude == doctest::Approx(0.4).epsilon(1e-9));
    CHECK_THROWS_AS(subharmonic_spectrum(alt, 0, 10), ContractError);
}

TEST_CASE("boxcar is a centered mean shifted inside at the edges")
{
    const std::vector<double> x{1, 2, 3, 4, 5};
    const auto y = boxcar(x, 3);
    CHECK(y[0] == doctest::Approx(2.0));
    CHECK(y[2] == doctest::Approx(3.0));
    CHECK(y[4] == doctest::Approx(4.0));
    const auto same = boxcar(x, 1);
    CHECK(same == x);
}

TEST_CASE("melting time from a synthetic energy ramp")
{
    std::vector<double> t(1000), e(1000), sig(1000);
    for (std::size_t k = 0; k < t.size(); ++k) {
        t[k] = static_cast<double>(k);
        e[k] = -0.5 + 0.001 * static_cast<double>(k);
        sig[k] = std::exp(-static_cast<double>(k) / 300.0) * (k % 2 ? -1 : 1);
    }
    const auto m = detect_melt_time(t, e, -0.2, 11);
    CHECK(m.melted);
    CHECK(m.tau == doctest::Approx(301.0).epsilon(0.01));
    const auto never = detect_melt_time(t, e, 5.0, 11);
    CHECK_FALSE(never.melted);
    CHECK(never.tau == 999.0);
    const auto hl = amplitude_half_life(t, sig, 0, 10, 1);
    REQUIRE(hl);
    CHECK(*hl == doctest::Approx(300.0 * std::log(2.0) + 4.5).epsilon(0.02));
}

TEST_CASE("equilibration of a relaxing step profile")
{
    const std::size_t n = 40, snaps = 200;
    std::vector<double> times(snaps);
    std::vector<std::vector<double>> prof(snaps, std::vector<double>(n));
    for (std::size_t k = 0; k < snaps; ++k) {
        times[k] = static_cast<double>(k);
        const double amp = 0.4 * std::exp(-static_cast<double>(k) / 20.0);
        for (std::size_t i = 0; i < n; ++i) prof[k][i] = 0.5 + (i < n / 2 ? amp : -amp);
    }
    EquilibrationOptions o;
    o.block = 5;
    o.threshold = 0.05;
    o.smoothing = 1;
    const auto eq = equilibration_times(times, prof, o);
    CHECK(eq.local_reached);
    CHECK(eq.tau_local == 0.0);  // blocks never straddle the step
    CHECK(eq.global_reached);
    // block means are 0.5 +- amp, so their spread is amp
    CHECK(eq.tau_global == doctest::Approx(std::ceil(20.0 * std::log(0.4 / 0.05))));
}

TEST_CASE("histograms and cdf distance")
{
    std::vector<double> a, b;
    for (int k = 0; k < 1000; ++k) {
        a.push_back(k / 1000.0);
        b.push_back(0.5 + k / 2000.0);
    }
    const auto h = histogram_local(a, 10, 0.0, 1.0);
    double total = 0.0;
    for (double d : h.density) total += d * h.bin_width();
    CHECK(total == doctest::Approx(1.0));
    CHECK(h.bin_center(0) == doctest::Approx(0.05));
    CHECK(cdf_distance(a, a) == 0.0);
    CHECK(cdf_distance(a, b) == doctest::Approx(0.5).epsilon(0.01));
    CHECK_THROWS_AS(histogram_local(std::vector<double>{}, 5), ContractError);
}

TEST_CASE("linear fit recovers an exact line")
{
    const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
    const auto f = linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK(f.slope_error == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("domain wall ensemble halves sit at their targets")
{
    StaticHamiltonian d;
    Mat3 t;
    t(2, 2) = -1.0;
    t(0, 0) = 0.3;
    d.add_pair({KernelKind::NearestNeighbor, 0.0, {}}, t);
    const auto lat = LatticeSpec::chain(40, Boundary::Open);
    EnergyTargetOptions o;
    const auto ens = build_domain_wall_ensemble(lat, d, -0.8, -0.3, 2, 5, o, KickSpec(Axis::X, 1, 2));
    REQUIRE(ens.size() == 2);
    const auto half = LatticeSpec::chain(20, Boundary::Open);
    const CompiledModel m(d, half);
    for (const auto& s : ens) {
        const std::vector<Vec3> left(s.spins.begin(), s.spins.begin() + 20), right(s.spins.begin() + 20, s.spins.end());
        CHECK(m.energy_density(left) == doctest::Approx(-0.8).epsilon(0.02));
        CHECK(m.energy_density(right) == doctest::Approx(-0.3).epsilon(0.05));
        double mz = 0.0;
        for (const auto& v : left) mz += v.z;
        CHECK(mz > 0.0);
    }
}

TEST_CASE("ensemble record statistics")
{
    EnsembleRecord e;
    TrajectoryRecord a, b;
    a.period = b.period = 1.0;
    a.cycles = b.cycles = {0, 1};
    a.times = b.times = {0.0, 1.0};
    a.magnetization = {{0, 0, 1}, {0, 0, 0.5}};
    b.magnetization = {{0, 0, 0}, {0, 0, 0.5}};
    a.energy_density = {1.0, 2.0};
    b.energy_density = {3.0, 2.0};
    e.members = {a, b};
    CHECK_NOTHROW(e.validate());
    CHECK(e.mean_sz() == std::vector<double>{0.5, 0.5});
    CHECK(e.mean_energy_density() == std::vector<double>{2.0, 2.0});
    CHECK(e.sz_standard_error()[0] == doctest::Approx(0.5));
    CHECK(e.sz_standard_error()[1] == doctest::Approx(0.0));
}
