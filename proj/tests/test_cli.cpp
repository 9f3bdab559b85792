#include "sinai/common.hpp"
#include "sinai/config.hpp"
#include "sinai/runner.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace sinai;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("sinai_test_" + tag);
    fs::remove_all(dir);
    return dir;
}

json tiny_paircorr_params() {
    return json{{"schedule", {1, 2}}, {"allow_fit_failure", true}};
}

} // namespace

TEST_CASE("config parsing: defaults, overrides, strictness") {
    ExperimentConfig cfg = parse_experiment_config(json{{"experiment", "paircorr"}},
                                                   "paircorr");
    CHECK(cfg.experiment == "paircorr");
    CHECK(cfg.seed == 1);
    CHECK(cfg.samples == 1000000);
    CHECK(cfg.stream_base == 10000);
    CHECK(cfg.workers == 0);
    CHECK(cfg.out_dir == "out");
    CHECK(cfg.table == json("reference"));

    json root = {
        {"experiment", "clt"}, {"seed", 7},    {"samples", 500},
        {"stream_base", 77},   {"workers", 2}, {"out", "elsewhere"},
        {"params", {{"window", 10}}},
    };
    ExperimentConfig c2 = parse_experiment_config(root, "clt");
    CHECK(c2.seed == 7);
    CHECK(c2.samples == 500);
    CHECK(c2.stream_base == 77);
    CHECK(c2.workers == 2);
    CHECK(c2.out_dir == "elsewhere");
    CHECK(c2.params.at("window") == 10);

    // file may omit the experiment; the subcommand supplies it
    CHECK(parse_experiment_config(json::object(), "gap").experiment == "gap");
    // but a conflicting value is an error
    CHECK_THROWS_AS(parse_experiment_config(json{{"experiment", "gap"}}, "clt"),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_experiment_config(json{{"experiment", "gap"}, {"mystery", 1}}, "gap"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_experiment_config(json{{"experiment", "gap"}, {"samples", -5}}, "gap"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_experiment_config(json{{"experiment", "gap"}, {"samples", "many"}},
                                "gap"),
        ConfigError);
}

TEST_CASE("config errors carry full key paths") {
    json bad_table = {{"experiment", "validate"},
                      {"table", {{"disks", {{{"center", {0.0, 0.0}}}}}}}};
    try {
        ExperimentConfig cfg = parse_experiment_config(bad_table, "validate");
        build_table(cfg.table);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("table.disks[0].radius") != std::string::npos);
    }

    json bad_sched = {{"experiment", "paircorr"},
                      {"params", {{"schedule", {1, 2, "three"}}}}};
    ExperimentConfig cfg = parse_experiment_config(bad_sched, "paircorr");
    std::ostringstream diag;
    try {
        run_experiment(cfg, diag);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("params.schedule[2]") != std::string::npos);
    }
}

TEST_CASE("canonical form drops reproducibility-neutral fields") {
    json a = {{"experiment", "paircorr"}, {"workers", 1}, {"out", "x"},
              {"seed", 3}};
    json b = {{"seed", 3}, {"out", "y"}, {"workers", 8},
              {"experiment", "paircorr"}};
    ExperimentConfig ca = parse_experiment_config(a, "paircorr");
    ExperimentConfig cb = parse_experiment_config(b, "paircorr");
    CHECK(ca.canonical() == cb.canonical());
    CHECK(ca.hash() == cb.hash());
    CHECK(ca.hash().size() == 16);

    json c = {{"experiment", "paircorr"}, {"seed", 4}};
    CHECK(parse_experiment_config(c, "paircorr").hash() != ca.hash());
}

TEST_CASE("table specs build or fail loudly") {
    BilliardTable ref = build_table(json("reference"));
    CHECK(ref.scatterers().size() == 2);

    json single = {{"disks", {{{"center", {0.0, 0.0}}, {"radius", 0.4}}}}};
    CHECK_THROWS_AS(build_table(single), InfiniteHorizonDetected);

    json overlap = {{"disks",
                     {{{"center", {0.0, 0.0}}, {"radius", 0.4}},
                      {{"center", {0.1, 0.0}}, {"radius", 0.4}}}}};
    CHECK_THROWS_AS(build_table(overlap), OverlappingScatterers);

    CHECK_THROWS_AS(build_table(json("mystery")), ConfigError);
}

TEST_CASE("experiment registry exposes names and descriptions") {
    const std::vector<std::string>& names = experiment_names();
    CHECK(names.size() >= 12);
    for (const std::string name :
         {"paircorr", "multicorr", "gap", "interlaced", "clt", "sigma", "stein-a1",
          "stein-a2", "pene", "gouezel", "sample", "validate"}) {
        CHECK(std::find(names.begin(), names.end(), name) != names.end());
        CHECK_FALSE(experiment_description(name).empty());
    }
}

TEST_CASE("run_experiment writes a coherent artifact set") {
    fs::path dir = fresh_dir("artifacts");
    json root = {{"experiment", "paircorr"}, {"samples", 4000},
                 {"stream_base", 60000},     {"out", dir.string()},
                 {"params", tiny_paircorr_params()}};
    ExperimentConfig cfg = parse_experiment_config(root, "paircorr");
    std::ostringstream diag;
    RunOutcome out = run_experiment(cfg, diag);
    CHECK(out.exit_code == 0);

    json summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary.at("experiment") == "paircorr");
    CHECK(summary.at("code_version") == kCodeVersion);
    CHECK(summary.at("config_hash") == cfg.hash());
    CHECK(summary.at("config") == cfg.canonical());
    CHECK(summary.at("pass") == true);
    REQUIRE(summary.at("checks").is_array());
    for (const auto& chk : summary.at("checks")) {
        CHECK(chk.contains("name"));
        CHECK(chk.contains("pass"));
    }
    CHECK(out.summary == summary);

    json manifest = json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest.at("config_hash") == cfg.hash());
    REQUIRE(manifest.at("outputs").is_array());
    bool lists_summary = false;
    for (const auto& entry : manifest.at("outputs")) {
        if (entry == "summary.json") lists_summary = true;
        CHECK(fs::exists(dir / entry.get<std::string>()));
    }
    CHECK(lists_summary);

    // curve CSV: header plus one row per schedule entry
    std::string csv = slurp(dir / "curve.csv");
    CHECK(csv.rfind("gap,value,std_error,n_samples", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("reruns and worker counts do not change artifact bytes") {
    json params = tiny_paircorr_params();
    auto run_with = [&params](const fs::path& dir, int workers) {
        json root = {{"experiment", "paircorr"}, {"samples", 4000},
                     {"stream_base", 60100},     {"out", dir.string()},
                     {"workers", workers},       {"params", params}};
        ExperimentConfig cfg = parse_experiment_config(root, "paircorr");
        std::ostringstream diag;
        REQUIRE(run_experiment(cfg, diag).exit_code == 0);
    };
    fs::path d1 = fresh_dir("workers1");
    fs::path d3 = fresh_dir("workers3");
    fs::path d1b = fresh_dir("workers1_rerun");
    run_with(d1, 1);
    run_with(d3, 3);
    run_with(d1b, 1);

    for (const std::string name : {"summary.json", "manifest.json", "curve.csv"}) {
        CHECK(slurp(d1 / name) == slurp(d3 / name));
        CHECK(slurp(d1 / name) == slurp(d1b / name));
    }
}

TEST_CASE("validate certifies the reference table and rejects open corridors") {
    fs::path ok_dir = fresh_dir("validate_ok");
    json ok = {{"experiment", "validate"}, {"out", ok_dir.string()}};
    std::ostringstream diag_ok;
    RunOutcome ro = run_experiment(parse_experiment_config(ok, "validate"), diag_ok);
    CHECK(ro.exit_code == 0);
    json s = json::parse(slurp(ok_dir / "summary.json"));
    CHECK(s.at("results").at("finite") == true);
    CHECK(s.at("results").at("tau_max").get<double>() > 0.0);

    fs::path bad_dir = fresh_dir("validate_bad");
    json bad = {{"experiment", "validate"},
                {"out", bad_dir.string()},
                {"table", {{"disks", {{{"center", {0.25, 0.25}}, {"radius", 0.2}}}}}}};
    std::ostringstream diag_bad;
    RunOutcome rb = run_experiment(parse_experiment_config(bad, "validate"), diag_bad);
    CHECK(rb.exit_code == 1);
    json sb = json::parse(slurp(bad_dir / "summary.json"));
    CHECK(sb.at("results").at("finite") == false);
    CHECK(sb.at("results").at("worst_corridor").at("clear_width").get<double>() > 0.0);
    CHECK(sb.at("pass") == false);
    // the diagnostic stream names the open corridor
    CHECK(diag_bad.str().find("open corridor") != std::string::npos);
}

TEST_CASE("sample writes one trajectory row per step") {
    fs::path dir = fresh_dir("sample");
    json root = {{"experiment", "sample"}, {"out", dir.string()},
                 {"params", {{"n_steps", 25}}}};
    std::ostringstream diag;
    RunOutcome out = run_experiment(parse_experiment_config(root, "sample"), diag);
    CHECK(out.exit_code == 0);
    std::string csv = slurp(dir / "trajectory.csv");
    CHECK(csv.rfind("step,scatterer,r,phi,flight_length", 0) == 0);
    // header + step-0 row + 25 collision rows
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 27);
}

TEST_CASE("dispatch rejects unknown experiments") {
    ExperimentConfig cfg = parse_experiment_config(json::object(), "nope");
    std::ostringstream diag;
    CHECK_THROWS_AS(run_experiment(cfg, diag), ConfigError);
}

TEST_CASE("unknown experiment parameters are rejected with their path") {
    json root = {{"experiment", "paircorr"}, {"params", {{"xyz", 1}}}};
    ExperimentConfig cfg = parse_experiment_config(root, "paircorr");
    std::ostringstream diag;
    try {
        run_experiment(cfg, diag);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("params.xyz") != std::string::npos);
    }
}

TEST_CASE("a small CLT run produces the documented summary fields") {
    fs::path dir = fresh_dir("clt_small");
    json root = {{"experiment", "clt"},
                 {"samples", 2000},
                 {"stream_base", 60200},
                 {"out", dir.string()},
                 {"params",
                  {{"windows", {10}}, {"i_max", 6}, {"sigma2_samples", 10000},
                   {"max_ks", 1.0}}}};
    std::ostringstream diag;
    RunOutcome out = run_experiment(parse_experiment_config(root, "clt"), diag);
    CHECK(out.exit_code == 0);
    json s = json::parse(slurp(dir / "summary.json"));
    REQUIRE(s.at("results").at("rows").is_array());
    const json& w = s.at("results").at("rows").at(0);
    CHECK(w.at("window") == 10);
    CHECK(w.at("ks").get<double>() >= 0.0);
    CHECK(w.at("ks_ci_hi").get<double>() >= w.at("ks_ci_lo").get<double>());
    CHECK(w.at("sigma2_used").get<double>() > 0.0);
}
