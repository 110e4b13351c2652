#include "prethermal/floquet.hpp"

#include <cmath>

namespace prethermal {

std::vector<double> TrajectoryRecord::sz_avg() const { return component(Axis::Z); }

std::vector<double> TrajectoryRecord::component(Axis a) const
{
    std::vector<double> out(magnetization.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = magnetization[k][index_of(a)];
    return out;
}

std::vector<double> TrajectoryRecord::site_sz(std::size_t k) const
{
    const auto& snap = snapshots.at(k);
    std::vector<double> out(snap.size());
    for (std::size_t i = 0; i < snap.size(); ++i) out[i] = snap[i].z;
    return out;
}

FloquetEvolver::FloquetEvolver(const DriveProtocol& protocol, const LatticeSpec& lattice)
    : protocol_(protocol), lattice_(lattice)
{
    protocol.validate();
    lattice.validate();
    bool any_triples = false;
    for (const auto& s : protocol.segments) {
        const auto& t = s.terms;
        CompiledSegment c{t.axis, {}, !t.two_body.is_zero(), t.three_body_J, t.field_h, s.duration};
        if (c.has_pairs) c.table = KernelTable(t.two_body.shape, lattice, t.two_body.strength);
        any_triples = any_triples || t.three_body_J != 0.0;
        segments_.push_back(std::move(c));
    }
    if (any_triples) triples_ = lattice.triples();
    comp_.resize(lattice.size());
    field_.resize(lattice.size());
}

void FloquetEvolver::evolve_segment(std::span<Vec3> spins, std::size_t index, double scale) const
{
    const auto& seg = segments_.at(index);
    const int a = index_of(seg.axis);
    const std::size_t n = spins.size();
    for (std::size_t i = 0; i < n; ++i) comp_[i] = spins[i][a];

    if (seg.has_pairs)
        seg.table.apply(comp_, field_);
    else
        std::fill(field_.begin(), field_.end(), 0.0);
    if (seg.three_body_J != 0.0) {
        for (const auto& [l, c, r] : triples_) {
            field_[l] += seg.three_body_J * comp_[c] * comp_[r];
            field_[c] += seg.three_body_J * comp_[l] * comp_[r];
            field_[r] += seg.three_body_J * comp_[l] * comp_[c];
        }
    }
    const double dt = seg.duration * scale;
    for (std::size_t i = 0; i < n; ++i) {
        const double angle = (field_[i] + seg.field) * dt;
        if (angle == 0.0) continue;
        spins[i] = rotate_cardinal(spins[i], seg.axis, std::cos(angle), std::sin(angle));
    }
}

void FloquetEvolver::apply_kick(std::span<Vec3> spins, int power) const
{
    if (!protocol_.kick) return;
    const auto& k = *protocol_.kick;
    const double angle = k.angle() * power;
    const double c = std::cos(angle), s = std::sin(angle);
    for (auto& v : spins) v = rotate_cardinal(v, k.axis(), c, s);
}

void FloquetEvolver::evolve_period(std::span<Vec3> spins) const
{
    for (std::size_t k = 0; k < segments_.size(); ++k) evolve_segment(spins, k);
    apply_kick(spins);
}

SpinState evolve_segment(const SpinState& state, const Segment& segment)
{
    state.validate();
    DriveProtocol single{{segment}, {}, segment.duration};
    FloquetEvolver ev(single, state.lattice);
    SpinState out = state;
    ev.evolve_segment(out.spins, 0);
    return out;
}

SpinState apply_kick(const SpinState& state, const KickSpec& kick)
{
    SpinState out = state;
    const double c = std::cos(kick.angle()), s = std::sin(kick.angle());
    for (auto& v : out.spins) v = rotate_cardinal(v, kick.axis(), c, s);
    return out;
}

SpinState evolve_period(const SpinState& state, const DriveProtocol& protocol)
{
    state.validate();
    FloquetEvolver ev(protocol, state.lattice);
    SpinState out = state;
    ev.evolve_period(out.spins);
    return out;
}

std::size_t estimate_record_bytes(std::size_t n_sites, std::int64_t n_cycles, const RecordSpec& spec)
{
    const auto cycles = static_cast<std::size_t>(n_cycles);
    const std::size_t samples = cycles / std::max<std::size_t>(spec.stride, 1) + 1;
    const std::size_t snaps = spec.snapshot_stride ? cycles / spec.snapshot_stride + 1 : 0;
    return samples * (2 * sizeof(std::int64_t) + sizeof(Vec3) + 2 * sizeof(double)) +
           snaps * (n_sites * sizeof(Vec3) + sizeof(std::int64_t));
}

namespace {

void record_sample(TrajectoryRecord& rec, std::int64_t cycle, std::span<const Vec3> spins, const RecordSpec& spec,
                   const CompiledModel* reference)
{
    const auto c = static_cast<std::size_t>(cycle);
    if (c % spec.stride == 0) {
        rec.cycles.push_back(cycle);
        rec.times.push_back(static_cast<double>(cycle) * rec.period);
        Vec3 m;
        for (const auto& s : spins) m += s;
        rec.magnetization.push_back(m * (1.0 / static_cast<double>(spins.size())));
        if (reference) rec.energy_density.push_back(reference->energy_density(spins));
    }
    if (spec.snapshot_stride && c % spec.snapshot_stride == 0) {
        rec.snapshot_cycles.push_back(cycle);
        rec.snapshots.emplace_back(spins.begin(), spins.end());
    }
}

} // namespace

TrajectoryResult run_trajectory(const SpinState& initial, const DriveProtocol& protocol, std::int64_t n_cycles,
                                const RecordSpec& spec, const StaticHamiltonian* reference)
{
    if (n_cycles < 1) throw ContractError("n_cycles must be >= 1");
    if (spec.stride < 1) throw ContractError("record stride must be >= 1");
    initial.validate();
    const std::size_t need = estimate_record_bytes(initial.size(), n_cycles, spec);
    if (need > spec.max_bytes)
        throw ContractError("recording would need " + std::to_string(need) + " bytes, limit is " +
                            std::to_string(spec.max_bytes));

    FloquetEvolver ev(protocol, initial.lattice);
    std::optional<CompiledModel> ref;
    if (reference) ref.emplace(*reference, initial.lattice);

    TrajectoryResult out{{}, initial};
    out.record.period = protocol.period;
    out.record.protocol_hash = protocol.fingerprint();
    auto& spins = out.final_state.spins;
    record_sample(out.record, 0, spins, spec, ref ? &*ref : nullptr);
    for (std::int64_t m = 1; m <= n_cycles; ++m) {
        ev.evolve_period(spins);
        record_sample(out.record, m, spins, spec, ref ? &*ref : nullptr);
    }
    return out;
}

} // namespace prethermal
