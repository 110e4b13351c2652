#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace prethermal {

enum class Boundary { Periodic, Open };

Boundary boundary_from_string(const std::string& s);
const char* to_string(Boundary b);

/// A 1D chain or a 2D square lattice, `extent` sites per axis.
struct LatticeSpec {
    int dimension = 1;
    int extent = 2;
    Boundary boundary = Boundary::Periodic;

    static LatticeSpec chain(int n, Boundary b = Boundary::Periodic) { return {1, n, b}; }
    static LatticeSpec square(int l, Boundary b = Boundary::Periodic) { return {2, l, b}; }

    std::size_t size() const
    {
        return dimension == 1 ? static_cast<std::size_t>(extent)
                              : static_cast<std::size_t>(extent) * static_cast<std::size_t>(extent);
    }

    /// Throws ContractError unless dimension is 1 or 2 and extent >= 2.
    void validate() const;

    std::array<int, 2> coords(std::size_t site) const;
    std::size_t site(int x, int y = 0) const;

    /// Graph (Manhattan) distance with the minimum-image convention on periodic axes.
    int distance(std::size_t i, std::size_t j) const;

    /// Unordered nearest-neighbour pairs (i < j), each listed once.
    std::vector<std::array<std::size_t, 2>> bonds() const;

    /// Consecutive triples (left, centre, right) along every lattice axis.
    /// Periodic axes need extent >= 3 for the three sites to be distinct.
    std::vector<std::array<std::size_t, 3>> triples() const;

    friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

} // namespace prethermal
