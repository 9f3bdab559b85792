#include "sinai/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"billiard: Monte Carlo experiments on finite-horizon dispersing "
                 "billiards (Sinai tables on the unit torus)"};
    app.require_subcommand(1);

    std::string config_file;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::uint64_t stream_base = 0;
    std::int64_t samples = 0;
    int workers = 0;
    for (const std::string& name : sinai::experiment_names()) {
        CLI::App* sub = app.add_subcommand(name, sinai::experiment_description(name));
        sub->add_option("config", config_file,
                        "JSON config file (defaults apply when omitted)");
        sub->add_option("--seed", seed, "master RNG seed");
        sub->add_option("--samples", samples, "Monte Carlo draws per estimated point");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--stream-base", stream_base,
                        "base RNG stream index (keep >= 1000)");
        sub->add_option("--workers", workers,
                        "worker threads (0 = SINAI_WORKERS env, then hardware)");
    }
    CLI11_PARSE(app, argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();

    try {
        sinai::ExperimentConfig cfg =
            config_file.empty()
                ? sinai::parse_experiment_config(
                      nlohmann::json{{"experiment", name}}, name)
                : sinai::load_config_file(config_file, name);
        if (sub->count("--seed") > 0) cfg.seed = seed;
        if (sub->count("--samples") > 0) cfg.samples = samples;
        if (sub->count("--out") > 0) cfg.out_dir = out_dir;
        if (sub->count("--stream-base") > 0) cfg.stream_base = stream_base;
        if (sub->count("--workers") > 0) cfg.workers = workers;

        sinai::RunOutcome out = sinai::run_experiment(cfg, std::cerr);
        std::cout << name << ": " << (out.exit_code == 0 ? "pass" : "FAIL")
                  << " (artifacts in " << cfg.out_dir << ", config "
                  << cfg.hash() << ")\n";
        return out.exit_code;
    } catch (const sinai::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
