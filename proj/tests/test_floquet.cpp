#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "prethermal/drive.hpp"
#include "prethermal/floquet.hpp"
#include "prethermal/model.hpp"

using namespace prethermal;

namespace {

DriveParameters long_range_params()
{
    DriveParameters p;
    p.z_kernel = {KernelKind::PowerLaw, 1.5, {}};
    p.Jz = -1.0;
    p.Jzz = 0.4;
    p.Jx = 0.7;
    p.Jy = 0.3;
    p.hx = 0.3;
    p.hy = 0.2;
    p.hz = 0.1;
    return p;
}

/// Fields of the piecewise-constant H_F(t) within one period, from per-segment models.
struct PiecewiseFields {
    std::vector<CompiledModel> models;
    std::vector<double> edges;

    PiecewiseFields(const DriveProtocol& proto, const LatticeSpec& lat)
    {
        double t = 0.0;
        for (const auto& seg : proto.segments) {
            models.emplace_back(StaticHamiltonian::from_terms(std::span<const TermSet>(&seg.terms, 1)), lat);
            t += seg.duration;
            edges.push_back(t);
        }
    }
    void operator()(double t, const std::vector<Vec3>& s, std::vector<Vec3>& out) const
    {
        std::size_t k = 0;
        while (k + 1 < edges.size() && t >= edges[k]) ++k;
        models[k].fields(s, out);
    }
};

} // namespace

TEST_CASE("kick specification")
{
    const KickSpec k(Axis::X, 2, 5);
    CHECK(k.angle() == doctest::Approx(4.0 * M_PI / 5.0));
    const Mat3 m5 = k.matrix(5);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(std::abs(m5(i, j) - (i == j ? 1.0 : 0.0)) < 1e-12);
    CHECK_THROWS_AS(KickSpec(Axis::X, 2, 4), ContractError);
    CHECK_THROWS_AS(KickSpec(Axis::X, 1, 0), ContractError);
    CHECK_NOTHROW(KickSpec::from_angle(Axis::X, 2.0 * M_PI / 3.0, 3, 1));
    CHECK_THROWS_AS(KickSpec::from_angle(Axis::X, 2.0, 3, 1), ContractError);
}

TEST_CASE("protocol windows")
{
    const auto p3 = three_window_protocol(long_range_params(), 4.0);
    CHECK(p3.segments.size() == 3);
    CHECK(p3.period == doctest::Approx(2.0 * M_PI / 4.0));
    CHECK(p3.omega() == doctest::Approx(4.0));
    CHECK(p3.segments[0].terms.axis == Axis::Z);
    CHECK(p3.segments[1].terms.axis == Axis::Y);
    CHECK(p3.segments[2].terms.axis == Axis::X);
    const auto p5 = five_window_protocol(long_range_params(), 4.0, KickSpec(Axis::X, 1, 3));
    REQUIRE(p5.segments.size() == 5);
    const double T = p5.period;
    CHECK(p5.segments[0].duration == doctest::Approx(T / 6));
    CHECK(p5.segments[2].duration == doctest::Approx(T / 3));
    CHECK(p5.segments[4].terms.axis == Axis::Z);
    CHECK(p5.segments[0].terms.three_body_J == 0.4);
    CHECK_NOTHROW(p5.validate());
    CHECK(p3.fingerprint() != p5.fingerprint());
    CHECK(p3.fingerprint() == three_window_protocol(long_range_params(), 4.0).fingerprint());
    auto bad = p3;
    bad.segments[0].duration *= 1.01;
    CHECK_THROWS_AS(bad.validate(), ContractError);
}

TEST_CASE("field-only drive is a product of closed-form rotations")
{
    DriveParameters p;
    p.hx = 0.7;
    p.hy = -0.4;
    p.hz = 1.3;
    const auto proto = three_window_protocol(p, 3.0, KickSpec(Axis::X, 1, 2));
    const auto lat = LatticeSpec::chain(4);
    Rng rng(2);
    const auto s0 = SpinState::random(lat, rng);
    const auto s1 = evolve_period(s0, proto);
    const double d = proto.period / 3.0;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        Vec3 v = s0.spins[i];
        v = rotate_cardinal(v, Axis::Z, p.hz * d);
        v = rotate_cardinal(v, Axis::Y, p.hy * d);
        v = rotate_cardinal(v, Axis::X, p.hx * d);
        v = rotate_cardinal(v, Axis::X, M_PI);
        CHECK(norm(v - s1.spins[i]) < 1e-14);
    }
}

TEST_CASE("each window conserves its own energy and the spin norms")
{
    const auto lat = LatticeSpec::chain(12, Boundary::Open);
    const auto proto = three_window_protocol(long_range_params(), 2.0);
    Rng rng(4);
    auto s = SpinState::random(lat, rng);
    for (const auto& seg : proto.segments) {
        const auto h = StaticHamiltonian::from_terms(std::span<const TermSet>(&seg.terms, 1));
        const double before = energy(s, h);
        const Vec3 m0 = s.magnetization();
        s = evolve_segment(s, seg);
        CHECK(std::abs(energy(s, h) - before) < 1e-12);
        CHECK(std::abs(s.magnetization()[index_of(seg.terms.axis)] - m0[index_of(seg.terms.axis)]) < 1e-14);
        CHECK(s.max_norm_error() < 1e-14);
    }
}

TEST_CASE("reversing a window's duration undoes it")
{
    const auto lat = LatticeSpec::square(3, Boundary::Periodic);
    const auto proto = three_window_protocol(long_range_params(), 2.0);
    const FloquetEvolver ev(proto, lat);
    Rng rng(6);
    const auto s0 = SpinState::random(lat, rng);
    auto s = s0.spins;
    for (std::size_t k = 0; k < 3; ++k) ev.evolve_segment(s, k);
    for (std::size_t k = 3; k-- > 0;) ev.evolve_segment(s, k, -1.0);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(norm(s[i] - s0.spins[i]) < 1e-13);
}

TEST_CASE("kick power M is the identity")
{
    const auto lat = LatticeSpec::chain(5);
    const auto proto = three_window_protocol(long_range_params(), 2.0, KickSpec(Axis::X, 2, 5));
    const FloquetEvolver ev(proto, lat);
    Rng rng(8);
    const auto s0 = SpinState::random(lat, rng);
    auto s = s0.spins;
    for (int k = 0; k < 5; ++k) ev.apply_kick(s);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(norm(s[i] - s0.spins[i]) < 1e-13);
    const auto once = apply_kick(s0, *proto.kick);
    CHECK(norm(once.spins[0] - proto.kick->matrix() * s0.spins[0]) < 1e-15);
}

TEST_CASE("exact period agrees with brute-force RK4 of the time-dependent equations")
{
    const auto lat = LatticeSpec::chain(6, Boundary::Open);
    const auto proto = five_window_protocol(long_range_params(), 5.0, KickSpec(Axis::X, 1, 3));
    const PiecewiseFields fields(proto, lat);
    Rng rng(10);
    const auto s0 = SpinState::random(lat, rng);
    auto ref = s0.spins;
    double t = 0.0;
    for (const auto& seg : proto.segments) {
        // integrate each window separately so no RK4 step straddles a discontinuity
        oracle::rk4(ref, t, t + seg.duration, 2e-4, [&](double, const std::vector<Vec3>& x, std::vector<Vec3>& b) {
            fields(t + 0.5 * seg.duration, x, b);
        });
        t += seg.duration;
    }
    for (auto& v : ref) v = proto.kick->matrix() * v;
    const auto s1 = evolve_period(s0, proto);
    for (std::size_t i = 0; i < lat.size(); ++i) CHECK(norm(s1.spins[i] - ref[i]) < 1e-9);
}

TEST_CASE("trajectory recording")
{
    const auto lat = LatticeSpec::chain(8);
    const auto proto = three_window_protocol(long_range_params(), 3.0, KickSpec(Axis::X, 1, 2));
    const auto d = StaticHamiltonian::from_terms(std::vector<TermSet>{proto.segments[0].terms}, 1.0);
    Rng rng(12);
    const auto s0 = SpinState::random(lat, rng);
    const auto r = run_trajectory(s0, proto, 10, RecordSpec{3, 5}, &d);
    CHECK(r.record.cycles == std::vector<std::int64_t>{0, 3, 6, 9});
    CHECK(r.record.snapshot_cycles == std::vector<std::int64_t>{0, 5, 10});
    CHECK(r.record.energy_density.size() == 4);
    CHECK(r.record.times[1] == doctest::Approx(3.0 * proto.period));
    CHECK(r.record.magnetization[0].z == doctest::Approx(s0.magnetization().z));
    CHECK(r.record.energy_density[0] == doctest::Approx(energy(s0, d) / 8.0));
    auto manual = s0;
    for (int k = 0; k < 10; ++k) manual = evolve_period(manual, proto);
    for (std::size_t i = 0; i < lat.size(); ++i) CHECK(norm(manual.spins[i] - r.final_state.spins[i]) < 1e-13);
    CHECK(r.record.site_sz(2).size() == 8);
    CHECK_THROWS_AS(run_trajectory(s0, proto, 0, RecordSpec{}), ContractError);
    CHECK_THROWS_AS(run_trajectory(s0, proto, 1000000, RecordSpec{1, 1, 1000}), ContractError);
    CHECK(estimate_record_bytes(8, 10, RecordSpec{1, 0}) > 0);
}

TEST_CASE("uncoupled spins under any drive stay decoupled from their neighbours")
{
    DriveParameters p;
    p.hx = 0.5;
    p.hz = 0.9;
    const auto lat = LatticeSpec::chain(6);
    const auto proto = three_window_protocol(p, 2.5, KickSpec(Axis::X, 1, 2));
    Rng rng(14);
    auto a = SpinState::random(lat, rng);
    auto b = a;
    b.spins[3] = rng.unit_vector();
    for (int k = 0; k < 20; ++k) {
        a = evolve_period(a, proto);
        b = evolve_period(b, proto);
    }
    for (std::size_t i = 0; i < lat.size(); ++i)
        if (i != 3) CHECK(norm(a.spins[i] - b.spins[i]) < 1e-13);
}
