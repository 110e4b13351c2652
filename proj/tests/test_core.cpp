#include <doctest.h>

#include <cmath>
#include <set>

#include "prethermal/hash.hpp"
#include "prethermal/lattice.hpp"
#include "prethermal/rng.hpp"
#include "prethermal/vec3.hpp"

using namespace prethermal;

TEST_CASE("rotation matrices are orthogonal and compose additively")
{
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        const Vec3 axis = rng.unit_vector();
        const double a = 6.0 * rng.uniform() - 3.0, b = 6.0 * rng.uniform() - 3.0;
        const Mat3 r = rotation_matrix(axis, a);
        const Mat3 rtr = transpose(r) * r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(rtr(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-13));
        const Mat3 ab = rotation_matrix(axis, a) * rotation_matrix(axis, b);
        const Mat3 c = rotation_matrix(axis, a + b);
        for (int k = 0; k < 9; ++k) CHECK(std::abs(ab.a[k] - c.a[k]) < 1e-13);
        CHECK(norm(r * axis - axis) < 1e-13);
    }
}

TEST_CASE("cardinal rotations agree with Rodrigues and are right-handed")
{
    const Vec3 v{0.3, -0.5, 0.81};
    for (Axis ax : {Axis::X, Axis::Y, Axis::Z}) {
        const Vec3 a = rotate_cardinal(v, ax, 0.7);
        const Vec3 b = rotate_about_axis(v, unit_vector(ax), 0.7);
        CHECK(norm(a - b) < 1e-14);
    }
    const Vec3 y = rotate_cardinal(Vec3{1, 0, 0}, Axis::Z, M_PI / 2);
    CHECK(norm(y - Vec3{0, 1, 0}) < 1e-15);
    CHECK_THROWS_AS(rotate_about_axis(v, Vec3{1, 1, 0}, 0.1), ContractError);
}

TEST_CASE("axis names round-trip")
{
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) CHECK(axis_from_string(to_string(a)) == a);
    CHECK_THROWS(axis_from_string("w"));
}

TEST_CASE("rng substreams depend only on seed and index")
{
    Rng a = Rng::stream(42, 7), b = Rng::stream(42, 7), c = Rng::stream(42, 8), d = Rng::stream(43, 7);
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
    CHECK(va != d.next_u64());
    // mt19937_64 reference value: 10000th output for the default seed.
    std::mt19937_64 ref;
    ref.discard(9999);
    CHECK(ref() == 9981545732273789042ULL);
}

TEST_CASE("uniform unit vectors have isotropic moments")
{
    Rng rng(11);
    const int n = 200000;
    double mx = 0, mz = 0, z2 = 0, xy = 0;
    for (int k = 0; k < n; ++k) {
        const Vec3 v = rng.unit_vector();
        CHECK(std::abs(norm(v) - 1.0) < 1e-12);
        mx += v.x;
        mz += v.z;
        z2 += v.z * v.z;
        xy += v.x * v.y;
    }
    // Standard errors: sqrt(1/(3n)) for components, sqrt(4/(45n)) for z^2.
    CHECK(std::abs(mx / n) < 4.0 * std::sqrt(1.0 / (3.0 * n)));
    CHECK(std::abs(mz / n) < 4.0 * std::sqrt(1.0 / (3.0 * n)));
    CHECK(std::abs(z2 / n - 1.0 / 3.0) < 4.0 * std::sqrt(4.0 / (45.0 * n)));
    CHECK(std::abs(xy / n) < 4.0 * std::sqrt(1.0 / (15.0 * n)));
}

TEST_CASE("below is unbiased on a small range")
{
    Rng rng(5);
    std::array<int, 3> counts{};
    for (int k = 0; k < 30000; ++k) ++counts[rng.below(3)];
    for (int c : counts) CHECK(std::abs(c - 10000) < 400);
}

TEST_CASE("fnv1a64 matches reference test vectors")
{
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
    CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("lattice bonds, distances and triples")
{
    const auto pc = LatticeSpec::chain(6, Boundary::Periodic);
    const auto oc = LatticeSpec::chain(6, Boundary::Open);
    CHECK(pc.bonds().size() == 6);
    CHECK(oc.bonds().size() == 5);
    CHECK(pc.distance(0, 5) == 1);
    CHECK(oc.distance(0, 5) == 5);
    CHECK(pc.triples().size() == 6);
    CHECK(oc.triples().size() == 4);

    const auto sq = LatticeSpec::square(4, Boundary::Periodic);
    CHECK(sq.size() == 16);
    CHECK(sq.bonds().size() == 32);
    CHECK(sq.distance(sq.site(0, 0), sq.site(3, 3)) == 2);
    CHECK(sq.triples().size() == 32);
    const auto so = LatticeSpec::square(4, Boundary::Open);
    CHECK(so.bonds().size() == 24);

    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& b : sq.bonds()) {
        CHECK(b[0] < b[1]);
        CHECK(sq.distance(b[0], b[1]) == 1);
        CHECK(seen.insert({b[0], b[1]}).second);
    }
    for (std::size_t s = 0; s < sq.size(); ++s) {
        const auto c = sq.coords(s);
        CHECK(sq.site(c[0], c[1]) == s);
    }
    CHECK_THROWS_AS(LatticeSpec::chain(1).validate(), ContractError);
    CHECK_THROWS_AS((LatticeSpec{3, 4, Boundary::Open}.validate()), ContractError);
}

TEST_CASE("distance is a metric on small lattices")
{
    for (const auto& lat : {LatticeSpec::chain(7), LatticeSpec::square(5), LatticeSpec::square(4, Boundary::Open)}) {
        const auto n = lat.size();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                CHECK(lat.distance(i, j) == lat.distance(j, i));
                CHECK((lat.distance(i, j) == 0) == (i == j));
                for (std::size_t k = 0; k < n; k += 3) CHECK(lat.distance(i, j) <= lat.distance(i, k) + lat.distance(k, j));
            }
    }
}
