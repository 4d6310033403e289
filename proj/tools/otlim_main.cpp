#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "otlim/pipeline.hpp"

// otlim: limiting potential of a polarised hypersurface degeneration via
// discrete optimal transport from the skeleton simplex to its dual complex.

int main(int argc, char** argv) {
    CLI::App app{"otlim: skeleton-to-dual-complex optimal transport potentials"};
    app.require_subcommand(1);

    std::string config_path;
    bool strict = false;
    bool emit_plan = false;
    std::uint64_t seed = 0;
    bool seed_set = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_flag("--strict", strict, "exit 4 when a validation threshold is breached");
    };

    CLI::App* run = app.add_subcommand("run", "solve the transport problem and export artifacts");
    add_common(run);
    run->add_flag("--emit-plan", emit_plan, "write the sparse coupling to plan.csv");
    run->add_option("--seed", seed, "seed for Monte Carlo spot checks (never the solve)")
        ->each([&](const std::string&) { seed_set = true; });

    CLI::App* validate = app.add_subcommand("validate", "cheap checks only, no solve");
    add_common(validate);

    CLI11_PARSE(app, argc, argv);

    try {
        otlim::RunConfig cfg = otlim::parse_run_config(config_path);
        if (emit_plan) cfg.emit_plan = true;
        if (seed_set) cfg.seed = seed;
        if (app.got_subcommand(run)) return otlim::run_pipeline(cfg, strict);
        return otlim::validate_pipeline(cfg, strict);
    } catch (const otlim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return otlim::kExitConfigError;
    } catch (const otlim::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return otlim::kExitSolverError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return otlim::kExitSolverError;
    }
}
