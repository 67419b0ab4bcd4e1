// Writes the shipped synthetic dataset: vehicle, cycles, dyno logs and a
// ready-to-run pipeline config.

#include "cli/svg.hpp"

#include "fuelred/drive_cycle.hpp"
#include "fuelred/dyno_ingest.hpp"
#include "fuelred/synthetic.hpp"
#include "fuelred/vehicle.hpp"

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

int main(int argc, char** argv) {
    namespace fs = std::filesystem;
    using namespace fuelred;

    CLI::App app{"Generate the synthetic vehicle, cycles and dyno logs"};
    std::string out = "data";
    std::uint64_t seed = synthetic::DynoLogOptions{}.seed;
    app.add_option("--out", out, "Destination directory");
    app.add_option("--seed", seed, "Seed for the dyno logger noise");
    CLI11_PARSE(app, argc, argv);

    try {
        const fs::path root(out);
        fs::create_directories(root / "cycles");
        fs::create_directories(root / "dyno");

        const auto vehicle = synthetic::default_vehicle();
        save_vehicle(root / "vehicle.json", vehicle);

        nlohmann::json config{{"vehicle", "vehicle.json"},
                              {"cycle_unit", "mps"},
                              {"dt", kDefaultDt},
                              {"output_dir", "../out"},
                              {"seed", seed},
                              {"svg", true}};
        for (const auto& cycle : synthetic::evaluation_cycles()) {
            write_cycle(root / "cycles" / (cycle.name() + ".csv"), cycle, SpeedUnit::mps);
            config["cycles"].push_back("cycles/" + cycle.name() + ".csv");
        }

        synthetic::DynoLogOptions dyno;
        dyno.seed = seed;
        for (const auto& cycle : {synthetic::hwfet_like(), synthetic::us06_like()}) {
            const auto log_name = cycle.name() + "_dyno.csv";
            write_dyno_log(root / "dyno" / log_name, synthetic::make_dyno_log(vehicle, cycle, dyno));
            config["dyno_logs"].push_back("dyno/" + log_name);
        }

        cli::write_text_file(root / "config.json", config.dump(2) + "\n");
        std::cout << "wrote dataset to " << root.string() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "fuelred_make_data: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
