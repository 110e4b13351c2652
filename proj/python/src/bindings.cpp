#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "prethermal/config.hpp"
#include "prethermal/effective.hpp"
#include "prethermal/experiment.hpp"
#include "prethermal/floquet.hpp"
#include "prethermal/model.hpp"

namespace py = pybind11;
using namespace prethermal;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::object to_python(const nlohmann::json& j)
{
    return py::module_::import("json").attr("loads")(j.dump());
}

ExperimentConfig load(const std::string& path, const std::vector<std::string>& overrides)
{
    auto doc = load_config_file(path);
    for (const auto& o : overrides) apply_override(doc, o);
    return parse_config(doc);
}

std::vector<Vec3> to_spins(const Array& a, std::size_t n)
{
    if (a.ndim() != 2 || a.shape(1) != 3 || static_cast<std::size_t>(a.shape(0)) != n)
        throw py::value_error("spins must have shape (" + std::to_string(n) + ", 3)");
    std::vector<Vec3> s(n);
    auto r = a.unchecked<2>();
    for (std::size_t i = 0; i < n; ++i) s[i] = {r(i, 0), r(i, 1), r(i, 2)};
    return s;
}

Array to_array(const std::vector<Vec3>& s)
{
    Array a({static_cast<py::ssize_t>(s.size()), py::ssize_t{3}});
    auto w = a.mutable_unchecked<2>();
    for (std::size_t i = 0; i < s.size(); ++i)
        for (int c = 0; c < 3; ++c) w(i, c) = s[i][c];
    return a;
}

Array to_array(const std::vector<double>& v)
{
    Array a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

// A configured model at one drive frequency.
class Model {
public:
    Model(const std::string& path, const std::vector<std::string>& overrides, std::optional<double> omega)
        : cfg_(load(path, overrides)),
          omega_(omega.value_or(cfg_.drive.omegas.front())),
          protocol_(make_protocol(cfg_, omega_)),
          d_(build_effective(protocol_)),
          compiled_(d_, cfg_.model.lattice)
    {
    }

    std::size_t n_sites() const { return cfg_.model.lattice.size(); }
    double omega() const { return omega_; }
    double period() const { return protocol_.period; }

    Array random_state(std::uint64_t seed) const
    {
        Rng rng(seed);
        return to_array(SpinState::random(cfg_.model.lattice, rng).spins);
    }

    double energy_density(const Array& spins) const { return compiled_.energy_density(to_spins(spins, n_sites())); }

    py::dict evolve(const Array& spins, std::int64_t n_cycles) const
    {
        SpinState s(cfg_.model.lattice, to_spins(spins, n_sites()));
        s.validate();
        TrajectoryResult r;
        {
            py::gil_scoped_release release;
            r = run_trajectory(s, protocol_, n_cycles, RecordSpec{}, &d_);
        }
        py::dict out;
        out["cycles"] = r.record.cycles;
        out["times"] = to_array(r.record.times);
        out["sz_avg"] = to_array(r.record.sz_avg());
        out["energy_density"] = to_array(r.record.energy_density);
        out["final"] = to_array(r.final_state.spins);
        return out;
    }

    py::dict evolve_effective(const Array& spins, double total_time, double dt) const
    {
        SpinState s(cfg_.model.lattice, to_spins(spins, n_sites()));
        s.validate();
        EffectiveRun r;
        {
            py::gil_scoped_release release;
            r = evolve_under_d(s, d_, total_time, dt, protocol_.period, RecordSpec{});
        }
        py::dict out;
        out["times"] = to_array(r.record.times);
        out["sz_avg"] = to_array(r.record.sz_avg());
        out["energy_density"] = to_array(r.record.energy_density);
        out["final"] = to_array(r.final_state.spins);
        out["dt_used"] = r.dt_used;
        return out;
    }

    bool emergent_symmetry(std::size_t n_states) const
    {
        return !cfg_.model.kick || verify_emergent_symmetry(d_, *cfg_.model.kick, cfg_.model.lattice, n_states);
    }

private:
    ExperimentConfig cfg_;
    double omega_;
    DriveProtocol protocol_;
    StaticHamiltonian d_;
    CompiledModel compiled_;
};

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Classical Floquet spin chains: configuration, runs and single trajectories";
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);

    m.attr("__version__") = code_version();

    m.def("list_scenarios", [] {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& s : scenarios()) out.emplace_back(s.id, s.description);
        return out;
    });
    m.def("defaults", [] { return to_python(config_defaults()); });
    m.def(
        "load_config", [](const std::string& path, const std::vector<std::string>& overrides) {
            return to_python(load(path, overrides).resolved);
        },
        py::arg("path"), py::arg("overrides") = std::vector<std::string>{},
        "Resolved configuration (defaults merged in); raises ConfigError when invalid.");
    m.def(
        "run",
        [](const std::string& path, const std::string& out_dir, const std::vector<std::string>& overrides, int workers,
           std::optional<std::uint64_t> seed) {
            auto ov = overrides;
            if (seed) ov.push_back("seed=" + std::to_string(*seed));
            const auto cfg = load(path, ov);
            RunOptions opts;
            opts.out_dir = out_dir;
            opts.workers = workers;
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run_experiment(cfg, opts);
            }
            py::dict out;
            out["summary"] = to_python(r.summary);
            out["manifest"] = r.manifest_path;
            return out;
        },
        py::arg("config"), py::arg("out_dir"), py::arg("overrides") = std::vector<std::string>{},
        py::arg("workers") = 1, py::arg("seed") = py::none(), "Runs a scenario; returns its summary and manifest path.");
    m.def(
        "verify_manifest",
        [](const std::string& path, bool rerun, const std::string& scratch) {
            const auto c = verify_manifest(path, rerun, scratch);
            return std::pair{c.ok, c.problems};
        },
        py::arg("manifest"), py::arg("rerun") = false, py::arg("scratch_dir") = "");

    py::class_<Model>(m, "Model")
        .def(py::init<const std::string&, const std::vector<std::string>&, std::optional<double>>(), py::arg("config"),
             py::arg("overrides") = std::vector<std::string>{}, py::arg("omega") = py::none())
        .def_property_readonly("n_sites", &Model::n_sites)
        .def_property_readonly("omega", &Model::omega)
        .def_property_readonly("period", &Model::period)
        .def("random_state", &Model::random_state, py::arg("seed") = 1)
        .def("energy_density", &Model::energy_density, "Energy density under the effective Hamiltonian.")
        .def("evolve", &Model::evolve, py::arg("spins"), py::arg("n_cycles"),
             "Exact Floquet evolution, sampled after every period.")
        .def("evolve_effective", &Model::evolve_effective, py::arg("spins"), py::arg("total_time"),
             py::arg("dt") = 1e-3, "RK4 evolution under the effective Hamiltonian, sampled once per period.")
        .def("emergent_symmetry", &Model::emergent_symmetry, py::arg("n_states") = 32);
}
