#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "prethermal/floquet.hpp"

namespace prethermal {

struct EnsembleRunSpec {
    std::int64_t n_cycles = 1;
    RecordSpec record;
    int workers = 1;
};

/// Ensemble means and standard errors on the common recording schedule. Toggled series apply
/// X^{-m} at cycle m; without a kick they equal the lab-frame series.
struct EnsembleSeries {
    double period = 0.0;
    std::size_t members = 0;
    std::vector<std::int64_t> cycles;
    std::vector<double> times;
    std::vector<double> sz_mean, sz_err;
    std::vector<double> toggled_mean, toggled_err;
    std::vector<double> energy_mean, energy_err;
    std::vector<std::int64_t> snapshot_cycles;
    std::vector<std::vector<double>> site_sz;  // toggled ensemble mean, [snapshot][site]
};

/// Called once per member, in index order, after its trajectory finishes.
using MemberSink = std::function<void(std::size_t index, const TrajectoryRecord& record)>;

/// Runs one trajectory per initial state. Members are evolved `workers` at a time and folded into
/// the running sums strictly in index order, so the result does not depend on the worker count
/// and only one batch of records is held in memory.
EnsembleSeries run_ensemble(const std::vector<SpinState>& initial, const DriveProtocol& protocol,
                            const StaticHamiltonian* reference, const EnsembleRunSpec& spec,
                            const MemberSink& sink = {});

} // namespace prethermal
