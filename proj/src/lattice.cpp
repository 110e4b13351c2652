#include "prethermal/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "prethermal/vec3.hpp"

namespace prethermal {

Boundary boundary_from_string(const std::string& s)
{
    if (s == "periodic") return Boundary::Periodic;
    if (s == "open") return Boundary::Open;
    throw ContractError("unknown boundary '" + s + "' (expected periodic|open)");
}

const char* to_string(Boundary b) { return b == Boundary::Periodic ? "periodic" : "open"; }

void LatticeSpec::validate() const
{
    if (dimension != 1 && dimension != 2)
        throw ContractError("lattice dimension must be 1 or 2, got " + std::to_string(dimension));
    if (extent < 2) throw ContractError("lattice extent must be >= 2, got " + std::to_string(extent));
}

std::array<int, 2> LatticeSpec::coords(std::size_t s) const
{
    if (dimension == 1) return {static_cast<int>(s), 0};
    return {static_cast<int>(s % extent), static_cast<int>(s / extent)};
}

std::size_t LatticeSpec::site(int x, int y) const
{
    return dimension == 1 ? static_cast<std::size_t>(x)
                          : static_cast<std::size_t>(y) * extent + static_cast<std::size_t>(x);
}

namespace {
int axis_distance(int a, int b, int extent, Boundary bc)
{
    int d = std::abs(a - b);
    if (bc == Boundary::Periodic) d = std::min(d, extent - d);
    return d;
}
} // namespace

int LatticeSpec::distance(std::size_t i, std::size_t j) const
{
    const auto ci = coords(i);
    const auto cj = coords(j);
    int d = axis_distance(ci[0], cj[0], extent, boundary);
    if (dimension == 2) d += axis_distance(ci[1], cj[1], extent, boundary);
    return d;
}

std::vector<std::array<std::size_t, 2>> LatticeSpec::bonds() const
{
    std::set<std::array<std::size_t, 2>> unique;
    const int n_axes = dimension;
    for (std::size_t s = 0; s < size(); ++s) {
        const auto c = coords(s);
        for (int ax = 0; ax < n_axes; ++ax) {
            auto next = c;
            next[ax] += 1;
            if (next[ax] >= extent) {
                if (boundary == Boundary::Open) continue;
                next[ax] -= extent;
            }
            const std::size_t t = site(next[0], next[1]);
            if (t == s) continue;
            unique.insert({std::min(s, t), std::max(s, t)});
        }
    }
    return {unique.begin(), unique.end()};
}

std::vector<std::array<std::size_t, 3>> LatticeSpec::triples() const
{
    std::vector<std::array<std::size_t, 3>> out;
    for (int ax = 0; ax < dimension; ++ax) {
        for (std::size_t s = 0; s < size(); ++s) {
            const auto c = coords(s);
            auto left = c;
            auto right = c;
            left[ax] -= 1;
            right[ax] += 1;
            if (boundary == Boundary::Open) {
                if (left[ax] < 0 || right[ax] >= extent) continue;
            } else {
                if (extent < 3) throw ContractError("three-site terms on a periodic axis need extent >= 3");
                left[ax] = (left[ax] + extent) % extent;
                right[ax] %= extent;
            }
            out.push_back({site(left[0], left[1]), s, site(right[0], right[1])});
        }
    }
    return out;
}

} // namespace prethermal
