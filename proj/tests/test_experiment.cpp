#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "prethermal/experiment.hpp"

using namespace prethermal;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

ExperimentConfig small_cpdtc()
{
    json doc = {{"scenario", "cpdtc"},
                {"seed", 5},
                {"model", {{"extent", 24}, {"boundary", "open"}, {"alpha", 1.8}, {"Jx", 0.5}, {"hx", 0.2}, {"hy", 0.2}}},
                {"drive", {{"omega", {6.0, 8.0}}}},
                {"ensemble", {{"n_traj", 5}, {"noise", 0.4}}},
                {"run", {{"n_cycles", 80}, {"snapshot_stride", 4}, {"csv_stride", 4}, {"site_columns", true}}},
                {"analysis", {{"epsilon_c", -0.1}, {"smoothing", 8}}}};
    return parse_config(doc);
}

} // namespace

TEST_CASE("outputs are byte-identical for any worker count")
{
    const auto cfg = small_cpdtc();
    const fs::path a = fs::temp_directory_path() / "prethermal_det_a", b = fs::temp_directory_path() / "prethermal_det_b";
    fs::remove_all(a);
    fs::remove_all(b);
    const auto ra = run_experiment(cfg, {a.string(), 1});
    const auto rb = run_experiment(cfg, {b.string(), 3});
    REQUIRE(ra.files.size() == rb.files.size());
    for (std::size_t k = 0; k < ra.files.size(); ++k) {
        CHECK(ra.files[k].path == rb.files[k].path);
        CHECK(ra.files[k].hash == rb.files[k].hash);
        CHECK(slurp(a / ra.files[k].path) == slurp(b / rb.files[k].path));
    }
    CHECK(fs::exists(a / "omega_6/trajectories/traj_0004.csv"));
    CHECK(fs::exists(a / "omega_8/ensemble.csv"));
    const auto header = slurp(a / "omega_6/trajectories/traj_0000.csv").substr(0, 40);
    CHECK(header.rfind("cycle,time,Sz_avg,energy_density,sz_0", 0) == 0);

    const auto check = verify_manifest(ra.manifest_path, true, (a / "rerun").string(), 2);
    CHECK(check.ok);
    std::ofstream(a / "omega_6/ensemble.csv", std::ios::app) << "tampered\n";
    const auto bad = verify_manifest(ra.manifest_path);
    CHECK_FALSE(bad.ok);
    CHECK(verify_manifest((a / "missing.json").string()).problems.size() == 1);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("manifest records provenance")
{
    const auto cfg = small_cpdtc();
    const fs::path a = fs::temp_directory_path() / "prethermal_manifest";
    fs::remove_all(a);
    const auto r = run_experiment(cfg, {a.string(), 1});
    const auto m = json::parse(slurp(r.manifest_path));
    CHECK(m.at("seed") == 5);
    CHECK(m.at("rng") == "mt19937_64/splitmix64-streams");
    CHECK(m.at("code_version") == code_version());
    CHECK(m.at("files").size() == r.files.size());
    CHECK(m.at("config") == cfg.resolved);
    const auto s = json::parse(slurp(a / "summary.json"));
    CHECK(s.at("runs").size() == 2);
    CHECK(s.at("emergent_symmetry") == true);
    fs::remove_all(a);
}

TEST_CASE("uncoupled spins show no chaos between H_F and D")
{
    json doc = {{"scenario", "single_vs_effective"},
                {"model", {{"extent", 16}, {"Jz", 0.0}, {"kick", {{"M", 1}}}}},
                {"drive", {{"omega", {5.0}}}},
                {"ensemble", {{"initial", "random"}}},
                {"run", {{"n_cycles", 40}, {"rk4_dt", 0.01}}}};
    const auto cfg = parse_config(doc);
    const fs::path a = fs::temp_directory_path() / "prethermal_free";
    fs::remove_all(a);
    const auto r = run_experiment(cfg, {a.string(), 1});
    const auto& run = r.summary.at("runs").at(0);
    CHECK(run.at("delta_m_plateau").get<double>() < 1e-9);
    CHECK(run.at("delta_m_hybrid_plateau").get<double>() < 1e-9);
    fs::remove_all(a);
}

TEST_CASE("initial ensembles are seeded per member")
{
    auto cfg = small_cpdtc();
    const auto d = StaticHamiltonian{};
    const auto a = initial_ensemble(cfg, d, 1);
    const auto b = initial_ensemble(cfg, d, 4);
    REQUIRE(a.size() == 5);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].spins == b[k].spins);
    CHECK(a[0].spins != a[1].spins);
    cfg.seed = 6;
    CHECK(initial_ensemble(cfg, d, 1)[0].spins != a[0].spins);
}
