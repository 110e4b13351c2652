#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "prethermal/drive.hpp"
#include "prethermal/model.hpp"

namespace prethermal {

/// What to record along a trajectory. Samples are taken at cycles that are multiples of the
/// stride, including cycle 0; snapshots (full per-site spin vectors) use their own stride.
struct RecordSpec {
    std::size_t stride = 1;
    std::size_t snapshot_stride = 0;  // 0: no snapshots
    std::size_t max_bytes = std::size_t{2} << 30;
};

/// Stroboscopic time series of one trajectory.
struct TrajectoryRecord {
    double period = 0.0;
    std::vector<std::int64_t> cycles;
    std::vector<double> times;
    std::vector<Vec3> magnetization;       // site-averaged spin vector
    std::vector<double> energy_density;    // under the reference Hamiltonian; empty without one
    std::vector<std::int64_t> snapshot_cycles;
    std::vector<std::vector<Vec3>> snapshots;
    std::uint64_t seed = 0;
    std::uint64_t protocol_hash = 0;

    std::size_t samples() const { return cycles.size(); }
    std::vector<double> sz_avg() const;
    std::vector<double> component(Axis a) const;
    /// Per-site S^z at snapshot `k`.
    std::vector<double> site_sz(std::size_t k) const;
};

/// A drive protocol bound to a lattice. Evolution is exact up to roundoff: inside a window
/// every S^a is conserved, so each spin precesses about the window axis at a constant rate.
class FloquetEvolver {
public:
    FloquetEvolver(const DriveProtocol& protocol, const LatticeSpec& lattice);

    const DriveProtocol& protocol() const { return protocol_; }
    const LatticeSpec& lattice() const { return lattice_; }

    void evolve_segment(std::span<Vec3> spins, std::size_t segment_index, double duration_scale = 1.0) const;
    void apply_kick(std::span<Vec3> spins, int power = 1) const;
    void evolve_period(std::span<Vec3> spins) const;

private:
    struct CompiledSegment {
        Axis axis;
        KernelTable table;
        bool has_pairs = false;
        double three_body_J = 0.0;
        double field = 0.0;
        double duration = 0.0;
    };

    DriveProtocol protocol_;
    LatticeSpec lattice_;
    std::vector<CompiledSegment> segments_;
    std::vector<std::array<std::size_t, 3>> triples_;
    mutable std::vector<double> comp_, field_;
};

SpinState evolve_segment(const SpinState& state, const Segment& segment);
SpinState apply_kick(const SpinState& state, const KickSpec& kick);
SpinState evolve_period(const SpinState& state, const DriveProtocol& protocol);

struct TrajectoryResult {
    TrajectoryRecord record;
    SpinState final_state;
};

/// Runs n_cycles >= 1 periods, recording after the kick (lab frame). When `reference` is given
/// the energy density under it is recorded at every sample.
TrajectoryResult run_trajectory(const SpinState& initial, const DriveProtocol& protocol, std::int64_t n_cycles,
                                const RecordSpec& spec, const StaticHamiltonian* reference = nullptr);

/// Estimated memory use of a recording; run_trajectory refuses to start above spec.max_bytes.
std::size_t estimate_record_bytes(std::size_t n_sites, std::int64_t n_cycles, const RecordSpec& spec);

} // namespace prethermal
