#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "prethermal/lattice.hpp"
#include "prethermal/rng.hpp"
#include "prethermal/vec3.hpp"

namespace prethermal {

inline constexpr double kSpinNormTolerance = 1e-9;

enum class KernelKind { None, NearestNeighbor, PowerLaw };

const char* to_string(KernelKind k);
KernelKind kernel_kind_from_string(const std::string& s);

/// Distance dependence of a two-body coupling, without its strength.
struct KernelShape {
    KernelKind kind = KernelKind::None;
    double exponent = 0.0;            // power-law only
    std::optional<int> cutoff;        // max graph distance, power-law only

    /// d^-alpha for power-law, [d == 1] for nearest-neighbour, 0 otherwise.
    double weight(int distance) const;

    friend bool operator==(const KernelShape&, const KernelShape&) = default;
};

/// Scalar two-body coupling J * shape(d).
struct CouplingKernel {
    KernelShape shape;
    double strength = 0.0;

    static CouplingKernel none() { return {}; }
    static CouplingKernel nearest_neighbor(double j) { return {{KernelKind::NearestNeighbor, 0.0, {}}, j}; }
    static CouplingKernel power_law(double j, double alpha, std::optional<int> cutoff = {});

    bool is_zero() const { return shape.kind == KernelKind::None || strength == 0.0; }
    double weight(int distance) const { return strength * shape.weight(distance); }
};

/// All terms acting on a single spin axis: sum_{i<j} J_ij S^a_i S^a_j
/// + J3 sum S^a_{l} S^a_c S^a_r + h sum S^a_i. Such a set is exactly integrable.
struct TermSet {
    Axis axis = Axis::Z;
    CouplingKernel two_body;
    double three_body_J = 0.0;
    double field_h = 0.0;
};

/// sum_{i<j} w(d_ij) S_i^T tensor S_j. The tensor is kept symmetric.
struct PairCoupling {
    KernelShape shape;
    Mat3 tensor;
};

/// A static Hamiltonian: pair couplings, one trilinear nearest-neighbour tensor applied to every
/// consecutive triple, and a uniform field, all scaled by `prefactor`.
///
/// Axis-aligned TermSets are the common input, but coefficients are stored in the full
/// {x,y,z} basis so that symmetry projections (which mix axes) stay representable.
struct StaticHamiltonian {
    std::vector<PairCoupling> pairs;
    Tensor3 triple;
    Vec3 field;
    double prefactor = 1.0;

    static StaticHamiltonian from_terms(std::span<const TermSet> terms, double prefactor = 1.0);

    /// Adds weight * terms (before the prefactor), merging pair couplings of equal shape.
    void add(const TermSet& terms, double weight = 1.0);
    void add_pair(const KernelShape& shape, const Mat3& tensor);

    bool has_triples() const;
    /// Folds the prefactor into the coefficients.
    StaticHamiltonian normalized() const;
    /// Zeroes coefficients with |c| < threshold and drops empty pair couplings.
    void prune(double threshold);
};

/// Phase-space point: one unit vector per lattice site.
struct SpinState {
    LatticeSpec lattice;
    std::vector<Vec3> spins;

    SpinState() = default;
    SpinState(LatticeSpec l, std::vector<Vec3> s);

    static SpinState polarized(const LatticeSpec& l, const Vec3& direction);
    static SpinState random(const LatticeSpec& l, Rng& rng);

    std::size_t size() const { return spins.size(); }
    /// Throws ContractError on length mismatch or a spin norm off by more than 1e-9.
    void validate() const;
    void renormalize();
    double max_norm_error() const;
    Vec3 magnetization() const;
};

/// Gradient of the energy with respect to S_i (B_i, with dS_i/dt = B_i x S_i).
Vec3 local_field(const SpinState& state, const StaticHamiltonian& h, std::size_t i);

/// Total energy with each unordered pair counted once.
double energy(const SpinState& state, const StaticHamiltonian& h);

/// max over sites of the summed magnitudes of all terms touching the site.
double j_local(const StaticHamiltonian& h, const LatticeSpec& lattice);

/// Rotates every spin about `axis` by `angle`.
SpinState rotate_all(const SpinState& state, const Vec3& axis, double angle);

} // namespace prethermal
