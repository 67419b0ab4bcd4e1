#include "cli/commands.hpp"
#include "cli/run_config.hpp"

#include <iostream>

#include "CLI11.hpp"

int main(int argc, char** argv) {
    namespace cli = fuelred::cli;

    CLI::App app{"Fuel-rate model reduction pipeline"};
    app.set_version_flag("--version", std::string(cli::kToolVersion));
    app.fallthrough();
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out_dir;
    std::string unit;
    double dt = 0.0;
    app.add_option("--config", config_path, "Run configuration (JSON)")->required();
    auto* out_opt = app.add_option("--out", out_dir, "Output directory, overrides the config");
    auto* unit_opt = app.add_option("--unit", unit, "Cycle speed unit: mps, kph or mph")
                         ->check(CLI::IsMember({"mps", "kph", "mph"}));
    auto* dt_opt = app.add_option("--dt", dt, "Simulation and evaluation step, s")->check(CLI::PositiveNumber);

    const std::vector<std::pair<std::string, std::string>> commands{
        {"simulate", "Run the reference powertrain over every cycle"},
        {"extract", "Extract semi-principled constants from the simulated traces"},
        {"fit-semi", "Fit the semi-principled model"},
        {"fit-simplified", "Fit the simplified polynomial model"},
        {"ingest", "Process dyno logs into speed/acceleration profiles"},
        {"validate", "Compare models and write reports"},
        {"pipeline", "Run every stage in order"},
    };
    for (const auto& [name, help] : commands) {
        app.add_subcommand(name, help);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        cli::ConfigOverrides overrides;
        if (*out_opt) {
            overrides.output_dir = out_dir;
        }
        if (*unit_opt) {
            overrides.unit = unit;
        }
        if (*dt_opt) {
            overrides.dt = dt;
        }
        const auto config = cli::load_run_config(config_path, overrides);
        cli::run_command(app.get_subcommands().front()->get_name(), config, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "fuelred: " << e.what() << '\n';
        return cli::exit_code_for(e);
    }
    return 0;
}
