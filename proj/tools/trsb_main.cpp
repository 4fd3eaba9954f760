#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "trsb/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"trsb — spin-chain simulations with synthetic gauge fields"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run an experiment from a config file");
    std::string config_path;
    trsb::RunOptions options;
    std::uint64_t seed = 0;
    run->add_option("config", config_path, "experiment config file")->required();
    run->add_option("--override", options.overrides, "override a config key (key=value)");
    run->add_option("--out", options.out_dir, "output directory");
    run->add_option("--units", options.units, "input units for couplings: hz or rad");
    auto* seed_opt = run->add_option("--seed", seed, "random seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*seed_opt) {
            options.has_seed = true;
            options.seed = seed;
        }
        const auto config = trsb::ConfigFile::parse_file(config_path);
        const auto files = trsb::run_experiment(config, options);
        for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
        return 0;
    } catch (const trsb::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
