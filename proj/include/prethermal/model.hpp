#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "prethermal/hamiltonian.hpp"

namespace prethermal {

/// Coupling weights of one kernel shape on a concrete lattice: dense rows for long-range
/// kernels, compressed neighbour lists otherwise. Diagonal is always zero.
class KernelTable {
public:
    KernelTable() = default;
    KernelTable(const KernelShape& shape, const LatticeSpec& lattice, double scale = 1.0);

    std::size_t size() const { return n_; }
    bool dense() const { return dense_; }

    /// out_i = sum_j w_ij in_j
    void apply(std::span<const double> in, std::span<double> out) const;
    double row_dot(std::size_t i, std::span<const double> in) const;
    double weight(std::size_t i, std::size_t j) const;
    /// sum_j |w_ij|
    double row_abs_sum(std::size_t i) const;

    template <class F>
    void for_each_neighbor(std::size_t i, F&& f) const
    {
        if (dense_) {
            const double* row = dense_w_.data() + i * n_;
            for (std::size_t j = 0; j < n_; ++j)
                if (row[j] != 0.0) f(j, row[j]);
        } else {
            for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) f(cols_[k], vals_[k]);
        }
    }

private:
    std::size_t n_ = 0;
    bool dense_ = false;
    std::vector<double> dense_w_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> cols_;
    std::vector<double> vals_;
};

/// A StaticHamiltonian bound to a lattice, with precomputed coupling tables.
/// Immutable after construction; safe to share between threads.
class CompiledModel {
public:
    CompiledModel(const StaticHamiltonian& h, const LatticeSpec& lattice);

    const LatticeSpec& lattice() const { return lattice_; }
    std::size_t size() const { return n_; }

    Vec3 local_field(std::span<const Vec3> spins, std::size_t i) const;
    /// Fields at all sites; `out` must have size() entries.
    void fields(std::span<const Vec3> spins, std::span<Vec3> out) const;
    double energy(std::span<const Vec3> spins) const;
    double energy_density(std::span<const Vec3> spins) const { return energy(spins) / static_cast<double>(n_); }

    /// Energy of the terms whose support lies entirely inside `sites`.
    double cluster_energy(std::span<const Vec3> spins, std::span<const std::size_t> sites) const;

private:
    struct PairBlock {
        KernelTable table;
        Mat3 tensor;
        std::array<bool, 3> used_columns{};
    };

    LatticeSpec lattice_;
    std::size_t n_ = 0;
    std::vector<PairBlock> pairs_;
    std::vector<std::array<std::size_t, 3>> triples_;
    std::vector<std::vector<std::size_t>> triples_of_site_;
    Tensor3 triple_;
    bool has_triples_ = false;
    Vec3 field_;

    Vec3 triple_gradient(std::span<const Vec3> s, std::size_t triple_index, std::size_t site) const;
    double triple_value(std::span<const Vec3> s, std::size_t triple_index) const;
};

} // namespace prethermal
