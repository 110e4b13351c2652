#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "prethermal/config.hpp"

using namespace prethermal;
using nlohmann::json;

namespace {

json minimal(const std::string& scenario)
{
    return json{{"scenario", scenario}, {"model", {{"extent", 16}}}};
}

std::string error_of(const json& doc)
{
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("defaults parse for every scenario that needs nothing else")
{
    for (const auto* s : {"single_vs_effective", "cpdtc", "mc_reference"}) {
        const auto cfg = parse_config(minimal(s));
        CHECK(cfg.scenario == s);
        CHECK(cfg.model.lattice.size() == 16);
        REQUIRE(cfg.model.kick);
        CHECK(cfg.model.kick->order() == 2);
        CHECK(cfg.resolved.at("run").at("n_cycles") == 1000);
    }
    CHECK(scenarios().size() == 5);
}

TEST_CASE("unknown keys and bad types are rejected with the dotted path")
{
    auto doc = minimal("cpdtc");
    doc["model"]["Jq"] = 1.0;
    CHECK(error_of(doc).find("model.Jq") != std::string::npos);
    doc = minimal("cpdtc");
    doc["run"]["n_cycles"] = "many";
    CHECK(error_of(doc).find("run.n_cycles") != std::string::npos);
    doc = minimal("cpdtc");
    doc["drive"]["omega"] = json::array();
    CHECK_FALSE(error_of(doc).empty());
    CHECK(error_of(minimal("nonsense")).find("nonsense") != std::string::npos);
    doc = minimal("cpdtc");
    doc["model"]["kick"]["k"] = 2;
    doc["model"]["kick"]["M"] = 4;
    CHECK_FALSE(error_of(doc).empty());
}

TEST_CASE("scenario requirements")
{
    CHECK(error_of(minimal("higher_order")).find("five-window") != std::string::npos);
    auto doc = minimal("domain_wall");
    CHECK_FALSE(error_of(doc).empty());
    doc["ensemble"] = {{"initial", "domain-wall"}, {"eps_left", -0.5}, {"eps_right", -0.3}};
    doc["run"] = {{"snapshot_stride", 10}};
    CHECK(error_of(doc).empty());
    doc = minimal("cpdtc");
    doc["mc"] = {{"sizes", {40}}};
    CHECK_FALSE(error_of(doc).empty());
    doc["analysis"] = {{"epsilon_c", -0.2}};
    CHECK(error_of(doc).empty());
    doc = minimal("cpdtc");
    doc["ensemble"] = {{"initial", "thermal"}};
    CHECK(error_of(doc).find("target_eps") != std::string::npos);
}

TEST_CASE("dotted overrides")
{
    json doc = minimal("cpdtc");
    apply_override(doc, "model.alpha=1.8");
    apply_override(doc, "drive.omega=[4,5]");
    apply_override(doc, "ensemble.initial=random");
    apply_override(doc, "run.site_columns=true");
    apply_override(doc, "run.snapshot_stride=1");
    const auto cfg = parse_config(doc);
    CHECK(cfg.model.params.z_kernel.exponent == 1.8);
    CHECK(cfg.drive.omegas == std::vector<double>{4.0, 5.0});
    CHECK(cfg.ensemble.initial == InitialRecipe::Random);
    CHECK(cfg.run.site_columns);
    CHECK_THROWS_AS(apply_override(doc, "novalue"), ConfigError);
    apply_override(doc, "model.nokey=1");
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("protocols follow the schedule and kick")
{
    json doc = minimal("higher_order");
    doc["drive"] = {{"schedule", "five-window"}, {"omega", {4.0}}};
    doc["model"]["kick"] = {{"axis", "x"}, {"k", 1}, {"M", 3}};
    const auto cfg = parse_config(doc);
    const auto p = make_protocol(cfg, 4.0);
    CHECK(p.segments.size() == 5);
    REQUIRE(p.kick);
    CHECK(p.kick->order() == 3);
    doc["model"]["kick"]["M"] = 1;
    CHECK_FALSE(parse_config(doc).model.kick);
}

TEST_CASE("config files may carry comments")
{
    const std::string path = "test_config_comments.json";
    {
        std::ofstream f(path);
        f << "// comment\n{ \"scenario\": \"cpdtc\", /* inline */ \"model\": {\"extent\": 8} }\n";
    }
    const auto cfg = parse_config(load_config_file(path));
    CHECK(cfg.model.lattice.size() == 8);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_config_file("does/not/exist.json"), ConfigError);
}
