#include "prethermal/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace prethermal {

using nlohmann::json;

const std::vector<ScenarioInfo>& scenarios()
{
    static const std::vector<ScenarioInfo> list = {
        {"single_vs_effective", "one state under H_F, under D (RK4) and D-then-H_F; delta M and energy traces"},
        {"domain_wall", "energy domain-wall ensemble; local/global equilibration and MC plateau reference"},
        {"cpdtc", "period-doubled ensemble dynamics; critical point, melting, spectra, lifetime fit"},
        {"higher_order", "five-window drive with 2*pi*k/M kicks; subharmonic spectra"},
        {"mc_reference", "Metropolis temperature sweeps, crossing analysis, matched-energy table"},
    };
    return list;
}

const json& config_defaults()
{
    static const json d = json::parse(R"({
  "scenario": "",
  "seed": 1,
  "model": {
    "dimension": 1, "extent": 64, "boundary": "periodic",
    "z_kernel": "power-law", "alpha": 1.5, "cutoff": null,
    "Jz": -1.0, "Jzz": 0.0, "Jx": 0.0, "Jy": 0.0,
    "hx": 0.0, "hy": 0.0, "hz": 0.0,
    "kick": {"axis": "x", "k": 1, "M": 2}
  },
  "drive": {"omega": [5.0], "schedule": "three-window"},
  "ensemble": {
    "n_traj": 64, "initial": "polarized", "direction": [0.0, 0.0, 1.0], "noise": 0.3,
    "target_eps": null, "eps_left": null, "eps_right": null, "align": true
  },
  "run": {
    "n_cycles": 1000, "stride": 1, "snapshot_stride": 0, "csv_stride": 0, "rk4_dt": 0.001,
    "site_columns": false, "write_trajectories": true, "max_bytes": 2147483648
  },
  "analysis": {
    "smoothing": 50, "threshold": 0.05, "block": 5, "epsilon_c": null,
    "plateau_begin": null, "plateau_end": null, "hybrid_cycles": 5, "max_peaks": 8,
    "cdf_threshold": 0.05, "histogram_bins": 50, "decay_fraction": 0.36787944117144233,
    "mc_match": false
  },
  "mc": {
    "n_equil": 10000, "n_meas": 30000, "n_runs": 8, "cone_angle": 0.0,
    "sizes": [40, 80, 160], "temperatures": [0.1, 0.2, 0.3, 0.4, 0.5],
    "crossing": "order-parameter", "local_observables": [], "match_eps": []
  }
})");
    return d;
}

namespace {

std::string join(const std::string& prefix, const std::string& key) { return prefix.empty() ? key : prefix + "." + key; }

bool compatible(const json& def, const json& v)
{
    if (def.is_null()) return v.is_null() || v.is_number();
    if (def.is_number_float()) return v.is_number();
    if (def.is_number_integer()) return v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
    if (def.is_boolean()) return v.is_boolean();
    if (def.is_string()) return v.is_string();
    if (def.is_array()) return v.is_array();
    if (def.is_object()) return v.is_object() || (v.is_null());
    return false;
}

void merge(json& target, const json& src, const std::string& path)
{
    for (auto it = src.begin(); it != src.end(); ++it) {
        const std::string key = join(path, it.key());
        if (!target.contains(it.key())) throw ConfigError("unknown key '" + key + "'");
        json& slot = target[it.key()];
        if (!compatible(slot, it.value())) throw ConfigError("wrong type for '" + key + "'");
        if (slot.is_object() && it.value().is_object())
            merge(slot, it.value(), key);
        else
            slot = it.value();
    }
}

template <class T>
T get(const json& doc, const std::string& dotted)
{
    const json* node = &doc;
    std::stringstream ss(dotted);
    std::string part;
    while (std::getline(ss, part, '.')) node = &node->at(part);
    try {
        return node->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("wrong type for '" + dotted + "'");
    }
}

template <class T>
std::optional<T> get_optional(const json& doc, const std::string& dotted)
{
    const json* node = &doc;
    std::stringstream ss(dotted);
    std::string part;
    while (std::getline(ss, part, '.')) node = &node->at(part);
    if (node->is_null()) return std::nullopt;
    return get<T>(doc, dotted);
}

void require(bool ok, const std::string& msg)
{
    if (!ok) throw ConfigError(msg);
}

template <class F>
auto checked(const std::string& key, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("invalid '" + key + "': " + e.what());
    }
}

} // namespace

json load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("cannot parse '" + path + "': " + e.what());
    }
}

void apply_override(json& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &doc;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
        if (!node->is_object()) throw ConfigError("override path '" + key + "' crosses a non-object");
        node = &(*node)[parts[k]];
        if (node->is_null()) *node = json::object();
    }
    if (!node->is_object()) throw ConfigError("override path '" + key + "' crosses a non-object");
    (*node)[parts.back()] = value;
}

ExperimentConfig parse_config(const json& doc)
{
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    json r = config_defaults();
    merge(r, doc, "");

    ExperimentConfig c;
    c.resolved = r;
    c.scenario = get<std::string>(r, "scenario");
    bool known = false;
    for (const auto& s : scenarios()) known = known || s.id == c.scenario;
    require(known, "unknown scenario '" + c.scenario + "' (see list-scenarios)");
    require(r.at("seed").is_number_integer() && get<std::int64_t>(r, "seed") >= 0, "'seed' must be a non-negative integer");
    c.seed = r.at("seed").get<std::uint64_t>();

    // model
    auto& m = c.model;
    m.lattice.dimension = get<int>(r, "model.dimension");
    m.lattice.extent = get<int>(r, "model.extent");
    m.lattice.boundary = checked("model.boundary", [&] { return boundary_from_string(get<std::string>(r, "model.boundary")); });
    checked("model", [&] { m.lattice.validate(); return 0; });
    const auto kind = checked("model.z_kernel", [&] { return kernel_kind_from_string(get<std::string>(r, "model.z_kernel")); });
    m.params.z_kernel = KernelShape{kind, 0.0, {}};
    if (kind == KernelKind::PowerLaw) {
        m.params.z_kernel.exponent = get<double>(r, "model.alpha");
        require(m.params.z_kernel.exponent > 0.0, "'model.alpha' must be > 0");
        if (auto cut = get_optional<int>(r, "model.cutoff")) {
            require(*cut >= 1, "'model.cutoff' must be >= 1");
            m.params.z_kernel.cutoff = *cut;
        }
    }
    m.params.Jz = get<double>(r, "model.Jz");
    m.params.Jzz = get<double>(r, "model.Jzz");
    m.params.Jx = get<double>(r, "model.Jx");
    m.params.Jy = get<double>(r, "model.Jy");
    m.params.hx = get<double>(r, "model.hx");
    m.params.hy = get<double>(r, "model.hy");
    m.params.hz = get<double>(r, "model.hz");
    if (!r.at("model").at("kick").is_null()) {
        const int mm = get<int>(r, "model.kick.M");
        const int kk = get<int>(r, "model.kick.k");
        const Axis ax = checked("model.kick.axis", [&] { return axis_from_string(get<std::string>(r, "model.kick.axis")); });
        auto spec = checked("model.kick", [&] { return KickSpec(ax, kk, mm); });
        if (mm > 1) m.kick = spec;
    }

    // drive
    c.drive.omegas = get<std::vector<double>>(r, "drive.omega");
    require(!c.drive.omegas.empty(), "'drive.omega' needs at least one frequency");
    for (double w : c.drive.omegas) require(w > 0.0, "'drive.omega' entries must be > 0");
    const auto sched = get<std::string>(r, "drive.schedule");
    if (sched == "three-window")
        c.drive.schedule = Schedule::ThreeWindow;
    else if (sched == "five-window")
        c.drive.schedule = Schedule::FiveWindow;
    else
        throw ConfigError("'drive.schedule' must be three-window or five-window");

    // ensemble
    auto& e = c.ensemble;
    require(get<std::int64_t>(r, "ensemble.n_traj") >= 1, "'ensemble.n_traj' must be >= 1");
    e.n_traj = get<std::size_t>(r, "ensemble.n_traj");
    const auto init = get<std::string>(r, "ensemble.initial");
    if (init == "polarized")
        e.initial = InitialRecipe::Polarized;
    else if (init == "random")
        e.initial = InitialRecipe::Random;
    else if (init == "thermal")
        e.initial = InitialRecipe::Thermal;
    else if (init == "domain-wall")
        e.initial = InitialRecipe::DomainWall;
    else
        throw ConfigError("'ensemble.initial' must be polarized, random, thermal or domain-wall");
    const auto dir = get<std::vector<double>>(r, "ensemble.direction");
    require(dir.size() == 3, "'ensemble.direction' needs three components");
    e.direction = {dir[0], dir[1], dir[2]};
    require(norm(e.direction) > 0.0, "'ensemble.direction' must be nonzero");
    e.direction = normalized(e.direction);
    e.noise = get<double>(r, "ensemble.noise");
    require(e.noise >= 0.0, "'ensemble.noise' must be >= 0");
    e.target_eps = get_optional<double>(r, "ensemble.target_eps");
    e.eps_left = get_optional<double>(r, "ensemble.eps_left");
    e.eps_right = get_optional<double>(r, "ensemble.eps_right");
    e.align = get<bool>(r, "ensemble.align");
    if (e.initial == InitialRecipe::Thermal) require(e.target_eps.has_value(), "thermal ensembles need 'ensemble.target_eps'");
    if (e.initial == InitialRecipe::DomainWall) {
        require(e.eps_left && e.eps_right, "domain-wall ensembles need 'ensemble.eps_left' and 'ensemble.eps_right'");
        require(m.lattice.dimension == 1 && m.lattice.extent % 2 == 0, "domain-wall ensembles need an even 1D chain");
    }

    // run
    auto& rn = c.run;
    require(get<std::int64_t>(r, "run.n_cycles") >= 1, "'run.n_cycles' must be >= 1");
    rn.n_cycles = get<std::int64_t>(r, "run.n_cycles");
    require(get<std::int64_t>(r, "run.stride") >= 1, "'run.stride' must be >= 1");
    rn.stride = get<std::size_t>(r, "run.stride");
    require(get<std::int64_t>(r, "run.snapshot_stride") >= 0, "'run.snapshot_stride' must be >= 0");
    rn.snapshot_stride = get<std::size_t>(r, "run.snapshot_stride");
    require(get<std::int64_t>(r, "run.csv_stride") >= 0, "'run.csv_stride' must be >= 0");
    rn.csv_stride = get<std::size_t>(r, "run.csv_stride");
    if (rn.csv_stride == 0) rn.csv_stride = rn.stride;
    require(rn.csv_stride % rn.stride == 0, "'run.csv_stride' must be a multiple of 'run.stride'");
    rn.rk4_dt = get<double>(r, "run.rk4_dt");
    require(rn.rk4_dt > 0.0, "'run.rk4_dt' must be > 0");
    rn.site_columns = get<bool>(r, "run.site_columns");
    if (rn.site_columns)
        require(rn.snapshot_stride > 0 && rn.csv_stride % rn.snapshot_stride == 0,
                "'run.site_columns' needs snapshots at every CSV row ('run.csv_stride' a multiple of 'run.snapshot_stride')");
    rn.write_trajectories = get<bool>(r, "run.write_trajectories");
    rn.max_bytes = get<std::size_t>(r, "run.max_bytes");

    // analysis
    auto& a = c.analysis;
    a.smoothing = get<std::int64_t>(r, "analysis.smoothing");
    require(a.smoothing >= 1, "'analysis.smoothing' must be >= 1");
    a.threshold = get<double>(r, "analysis.threshold");
    require(a.threshold > 0.0, "'analysis.threshold' must be > 0");
    require(get<std::int64_t>(r, "analysis.block") >= 2, "'analysis.block' must be >= 2");
    a.block = get<std::size_t>(r, "analysis.block");
    a.epsilon_c = get_optional<double>(r, "analysis.epsilon_c");
    a.plateau_begin = get_optional<std::int64_t>(r, "analysis.plateau_begin");
    a.plateau_end = get_optional<std::int64_t>(r, "analysis.plateau_end");
    if (a.plateau_begin && a.plateau_end) require(*a.plateau_begin < *a.plateau_end, "plateau window is empty");
    a.hybrid_cycles = get<std::int64_t>(r, "analysis.hybrid_cycles");
    require(a.hybrid_cycles >= 0 && a.hybrid_cycles < rn.n_cycles, "'analysis.hybrid_cycles' must lie in [0, n_cycles)");
    require(get<std::int64_t>(r, "analysis.max_peaks") >= 1, "'analysis.max_peaks' must be >= 1");
    a.max_peaks = get<std::size_t>(r, "analysis.max_peaks");
    a.cdf_threshold = get<double>(r, "analysis.cdf_threshold");
    require(get<std::int64_t>(r, "analysis.histogram_bins") >= 1, "'analysis.histogram_bins' must be >= 1");
    a.histogram_bins = get<std::size_t>(r, "analysis.histogram_bins");
    a.decay_fraction = get<double>(r, "analysis.decay_fraction");
    require(a.decay_fraction > 0.0 && a.decay_fraction < 1.0, "'analysis.decay_fraction' must lie in (0, 1)");
    a.mc_match = get<bool>(r, "analysis.mc_match");

    // mc
    auto& mc = c.mc;
    for (const char* k : {"mc.n_equil", "mc.n_meas", "mc.n_runs"})
        require(get<std::int64_t>(r, k) >= 1, std::string("'") + k + "' must be >= 1");
    mc.mc.n_equil = get<std::int64_t>(r, "mc.n_equil");
    mc.mc.n_meas = get<std::int64_t>(r, "mc.n_meas");
    mc.mc.n_runs = get<int>(r, "mc.n_runs");
    mc.mc.cone_angle = get<double>(r, "mc.cone_angle");
    mc.mc.seed = c.seed;
    checked("mc", [&] { mc.mc.validate(); return 0; });
    for (auto s : get<std::vector<std::int64_t>>(r, "mc.sizes")) {
        require(s >= 2, "'mc.sizes' entries must be >= 2");
        mc.sizes.push_back(static_cast<std::size_t>(s));
    }
    mc.temperatures = get<std::vector<double>>(r, "mc.temperatures");
    for (double t : mc.temperatures) require(t > 0.0, "'mc.temperatures' entries must be > 0");
    const auto cross = get<std::string>(r, "mc.crossing");
    if (cross == "order-parameter")
        mc.crossing = CrossingQuantity::OrderParameter;
    else if (cross == "binder")
        mc.crossing = CrossingQuantity::Binder;
    else
        throw ConfigError("'mc.crossing' must be order-parameter or binder");
    for (const auto& s : get<std::vector<std::string>>(r, "mc.local_observables"))
        mc.local_observables.push_back(checked("mc.local_observables", [&] { return local_observable_from_string(s); }));
    mc.match_eps = get<std::vector<double>>(r, "mc.match_eps");

    // scenario requirements
    if (c.scenario == "higher_order")
        require(c.drive.schedule == Schedule::FiveWindow, "higher_order uses 'drive.schedule' = five-window");
    if (c.scenario == "domain_wall") {
        require(e.initial == InitialRecipe::DomainWall, "domain_wall needs 'ensemble.initial' = domain-wall");
        require(rn.snapshot_stride > 0, "domain_wall needs 'run.snapshot_stride' > 0");
    }
    if (c.scenario == "mc_reference" || (c.scenario == "cpdtc" && !a.epsilon_c)) {
        require(mc.sizes.size() >= 2, "critical-point analysis needs >= 2 entries in 'mc.sizes'");
        require(mc.temperatures.size() >= 2, "critical-point analysis needs >= 2 entries in 'mc.temperatures'");
    }
    return c;
}

DriveProtocol make_protocol(const ExperimentConfig& cfg, double omega)
{
    return cfg.drive.schedule == Schedule::FiveWindow ? five_window_protocol(cfg.model.params, omega, cfg.model.kick)
                                                      : three_window_protocol(cfg.model.params, omega, cfg.model.kick);
}

const char* to_string(Schedule s) { return s == Schedule::FiveWindow ? "five-window" : "three-window"; }

const char* to_string(InitialRecipe r)
{
    switch (r) {
    case InitialRecipe::Polarized: return "polarized";
    case InitialRecipe::Random: return "random";
    case InitialRecipe::Thermal: return "thermal";
    default: return "domain-wall";
    }
}

} // namespace prethermal
