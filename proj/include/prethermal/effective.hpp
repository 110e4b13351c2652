#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "prethermal/drive.hpp"
#include "prethermal/floquet.hpp"
#include "prethermal/model.hpp"

namespace prethermal {

/// Conjugates every term of h by the spin rotation r: H'(S) = H(r S).
StaticHamiltonian rotate_hamiltonian(const StaticHamiltonian& h, const Mat3& r);

/// Average of h over the cyclic group generated by the kick: (1/M) sum_m H(X^m S).
StaticHamiltonian project_symmetric(const StaticHamiltonian& h, const KickSpec& kick);

/// Leading-order prethermal Hamiltonian: the duration-weighted time average of the segment
/// Hamiltonians, projected onto the kick-invariant part. Coefficients below 1e-14 are dropped.
StaticHamiltonian build_effective(const DriveProtocol& protocol);

/// True iff energy(X S) == energy(S) within `tolerance` on `n_states` random states.
bool verify_emergent_symmetry(const StaticHamiltonian& d, const KickSpec& kick, const LatticeSpec& lattice,
                              std::size_t n_states = 32, std::uint64_t seed = 7, double tolerance = 1e-9);

/// Classical RK4 for dS_i/dt = B_i(S) x S_i, followed by renormalisation of every spin.
/// Holds scratch buffers; one integrator per trajectory.
class Rk4Integrator {
public:
    Rk4Integrator(const StaticHamiltonian& d, const LatticeSpec& lattice);

    const CompiledModel& model() const { return model_; }
    void step(std::span<Vec3> spins, double dt);
    /// Same step without the final renormalisation; returns max | |S_i| - 1 |.
    double step_unnormalized(std::span<Vec3> spins, double dt);

private:
    CompiledModel model_;
    std::vector<Vec3> k1_, k2_, k3_, k4_, tmp_, fields_;
    void derivative(std::span<const Vec3> s, std::span<Vec3> out);
};

SpinState rk4_step(const SpinState& state, const StaticHamiltonian& d, double dt);

struct EffectiveRun {
    TrajectoryRecord record;
    SpinState final_state;
    double dt_used = 0.0;
    std::int64_t steps_per_period = 0;
};

/// Integrates under d for total_time, sampling at multiples of `period` so records line up with
/// Floquet trajectories. dt is reduced to period / ceil(period / dt) when it does not divide the
/// period; the value used is reported in the result. A trailing partial period is integrated
/// but not recorded. The energy density under d is recorded at every sample.
EffectiveRun evolve_under_d(const SpinState& initial, const StaticHamiltonian& d, double total_time, double dt,
                            double period, const RecordSpec& spec);

} // namespace prethermal
