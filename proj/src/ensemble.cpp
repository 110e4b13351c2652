#include "prethermal/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "prethermal/analysis.hpp"
#include "prethermal/parallel.hpp"

namespace prethermal {

namespace {

struct Moments {
    std::vector<double> sum, sum2;

    void resize(std::size_t n)
    {
        sum.assign(n, 0.0);
        sum2.assign(n, 0.0);
    }
    void add(const std::vector<double>& v)
    {
        for (std::size_t k = 0; k < v.size(); ++k) {
            sum[k] += v[k];
            sum2[k] += v[k] * v[k];
        }
    }
    void finish(std::size_t n, std::vector<double>& mean, std::vector<double>& err) const
    {
        const double dn = static_cast<double>(n);
        mean.resize(sum.size());
        err.assign(sum.size(), 0.0);
        for (std::size_t k = 0; k < sum.size(); ++k) {
            mean[k] = sum[k] / dn;
            if (n > 1) {
                const double var = std::max(0.0, (sum2[k] - dn * mean[k] * mean[k]) / (dn - 1.0));
                err[k] = std::sqrt(var / dn);
            }
        }
    }
};

} // namespace

EnsembleSeries run_ensemble(const std::vector<SpinState>& initial, const DriveProtocol& protocol,
                            const StaticHamiltonian* reference, const EnsembleRunSpec& spec, const MemberSink& sink)
{
    if (initial.empty()) throw ContractError("ensemble needs at least one member");
    const std::size_t batch = static_cast<std::size_t>(std::max(spec.workers, 1));

    EnsembleSeries out;
    out.period = protocol.period;
    out.members = initial.size();
    Moments sz, tog, en;

    std::vector<TrajectoryRecord> records(batch);
    for (std::size_t first = 0; first < initial.size(); first += batch) {
        const std::size_t count = std::min(batch, initial.size() - first);
        parallel_for(count, spec.workers, [&](std::size_t b) {
            records[b] = run_trajectory(initial[first + b], protocol, spec.n_cycles, spec.record, reference).record;
        });
        for (std::size_t b = 0; b < count; ++b) {
            const auto& rec = records[b];
            if (sink) sink(first + b, rec);
            const auto toggled = protocol.kick ? toggling_frame(rec, *protocol.kick) : rec;
            if (first + b == 0) {
                out.cycles = rec.cycles;
                out.times = rec.times;
                out.snapshot_cycles = rec.snapshot_cycles;
                sz.resize(rec.samples());
                tog.resize(rec.samples());
                en.resize(rec.energy_density.size());
                out.site_sz.assign(rec.snapshots.size(), std::vector<double>(rec.snapshots.empty() ? 0 : rec.snapshots[0].size(), 0.0));
            }
            sz.add(rec.sz_avg());
            tog.add(toggled.sz_avg());
            en.add(rec.energy_density);
            for (std::size_t k = 0; k < toggled.snapshots.size(); ++k)
                for (std::size_t i = 0; i < toggled.snapshots[k].size(); ++i) out.site_sz[k][i] += toggled.snapshots[k][i].z;
        }
        for (std::size_t b = 0; b < count; ++b) records[b] = TrajectoryRecord{};
    }

    const std::size_t n = initial.size();
    sz.finish(n, out.sz_mean, out.sz_err);
    tog.finish(n, out.toggled_mean, out.toggled_err);
    en.finish(n, out.energy_mean, out.energy_err);
    for (auto& row : out.site_sz)
        for (double& v : row) v /= static_cast<double>(n);
    return out;
}

} // namespace prethermal
