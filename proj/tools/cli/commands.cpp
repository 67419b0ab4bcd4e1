#include "cli/commands.hpp"

#include "cli/svg.hpp"

#include "fuelred/errors.hpp"
#include "fuelred/map_extraction.hpp"
#include "fuelred/reference_powertrain.hpp"
#include "fuelred/semi_principled.hpp"
#include "fuelred/simplified.hpp"
#include "fuelred/trace.hpp"
#include "fuelred/units.hpp"
#include "fuelred/vehicle.hpp"

#include <fstream>
#include <sstream>

namespace fuelred::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    }
    return dir;
}

fs::path require(const fs::path& path, const std::string& stage) {
    if (!fs::exists(path)) {
        throw MissingPrerequisite(path.filename().string() + " not found at " + path.string() + "; run '" + stage +
                                  "' first");
    }
    return path;
}

void write_json(const fs::path& path, const json& doc) {
    write_text_file(path, doc.dump(2) + "\n");
}

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::vector<DriveCycle> load_cycles(const RunConfig& config) {
    std::vector<DriveCycle> cycles;
    for (const auto& path : config.cycles) {
        cycles.push_back(load_cycle(path, config.cycle_unit));
    }
    return cycles;
}

// Rebuilds a VCD dataset from trace files written by `simulate`.
VcdDataset read_vcd(const RunConfig& config, const Vehicle& vehicle, const char* dir) {
    VcdDataset ds;
    ds.params = vehicle.params;
    for (const auto& cycle : config.cycles) {
        const auto path = require(config.output_dir / dir / (cycle.stem().string() + ".csv"), "simulate");
        auto trace = read_trace_csv(path);
        if (!trace.has_dynamics) {
            throw ParseError(path.string() + ": trace lacks internal dynamics columns");
        }
        auto events = detect_shift_events(trace);
        ds.events.insert(ds.events.end(), events.begin(), events.end());
        ds.traces.push_back(std::move(trace));
    }
    return ds;
}

fs::path profile_path(const RunConfig& config, const fs::path& log) {
    return config.output_dir / artifact::kProfiles / (log.stem().string() + ".csv");
}

}  // namespace

Artifacts cmd_simulate(const RunConfig& config) {
    const auto vehicle = load_vehicle(config.vehicle);
    const auto cycles = load_cycles(config);
    const auto std_dir = ensure_dir(config.output_dir / artifact::kTraces);
    const auto locked_dir = ensure_dir(config.output_dir / artifact::kLockedTraces);
    const auto stamp = provenance_line(config);
    const ReferencePowertrain plant(vehicle);
    Artifacts written;
    for (const auto& cycle : cycles) {
        SimulationOptions opts;
        opts.dt = config.dt;
        const auto path = std_dir / (cycle.name() + ".csv");
        write_trace_csv(path, plant.simulate(cycle, opts), stamp);
        written.push_back(path);
        opts.lock_torque_converter = true;
        const auto locked = locked_dir / (cycle.name() + ".csv");
        write_trace_csv(locked, plant.simulate(cycle, opts), stamp);
        written.push_back(locked);
    }
    return written;
}

Artifacts cmd_extract(const RunConfig& config) {
    const auto vehicle = load_vehicle(config.vehicle);
    const auto standard = read_vcd(config, vehicle, artifact::kTraces);
    const auto locked = read_vcd(config, vehicle, artifact::kLockedTraces);
    ExtractionOptions opts;
    opts.dt = config.dt;
    opts.maps = config.maps;
    opts.correction = config.correction;
    const auto model = derive_semi_model(PrincipledInputs::from_vehicle(vehicle), standard, locked, opts);
    const auto& meta = model.metadata();
    json doc{{"provenance", provenance(config)},
             {"constants", model.constants()},
             {"shift_events", standard.events},
             {"map_residuals",
              {{"fuel_rms_gps", meta.fuel_rms},
               {"engine_speed_rms_radps", meta.speed_rms},
               {"engine_torque_rms_nm", meta.torque_rms}}}};
    ensure_dir(config.output_dir);
    const auto path = config.output_dir / artifact::kExtraction;
    write_json(path, doc);
    return {path};
}

Artifacts cmd_fit_semi(const RunConfig& config) {
    const auto vehicle = load_vehicle(config.vehicle);
    const auto doc = read_json(require(config.output_dir / artifact::kExtraction, "extract"));
    ExtractedConstants constants;
    try {
        doc.at("constants").get_to(constants);
    } catch (const json::exception& e) {
        throw ParseError(std::string(artifact::kExtraction) + ": " + e.what());
    }
    const auto locked = read_vcd(config, vehicle, artifact::kLockedTraces);
    const auto model = assemble_semi_model(PrincipledInputs::from_vehicle(vehicle), constants, locked, config.maps);
    const auto path = config.output_dir / artifact::kSemiModel;
    save_semi_model(path, model, provenance(config));
    return {path};
}

Artifacts cmd_fit_simplified(const RunConfig& config) {
    const auto semi = load_semi_model(require(config.output_dir / artifact::kSemiModel, "fit-semi"));
    const auto model = fit_simplified(semi, config.simplified);
    const auto path = config.output_dir / artifact::kSimplifiedModel;
    save_simplified_model(path, model, provenance(config));
    return {path};
}

Artifacts cmd_ingest(const RunConfig& config) {
    Artifacts written;
    if (config.dyno_logs.empty()) {
        return written;
    }
    ensure_dir(config.output_dir / artifact::kProfiles);
    const auto stamp = provenance_line(config);
    for (const auto& log_path : config.dyno_logs) {
        const auto log = load_dyno_log(log_path);
        const auto profile = ingest_dyno_log(log, config.ingest);
        const auto csv = profile_path(config, log_path);
        write_profile_csv(csv, profile, stamp);
        auto sidecar = csv;
        sidecar.replace_extension(".json");
        write_json(sidecar, json{{"provenance", provenance(config)},
                                 {"source", log_path.filename().string()},
                                 {"processing", profile.provenance}});
        written.push_back(csv);
        written.push_back(sidecar);
    }
    return written;
}

std::vector<ValidationPair> validation_pairs(const RunConfig& config) {
    const auto semi = load_semi_model(require(config.output_dir / artifact::kSemiModel, "fit-semi"));
    const auto simple = load_simplified_model(require(config.output_dir / artifact::kSimplifiedModel, "fit-simplified"));
    std::vector<ValidationPair> pairs;
    for (const auto& cycle : load_cycles(config)) {
        const auto ref_path = require(config.output_dir / artifact::kTraces / (cycle.name() + ".csv"), "simulate");
        const auto ref = read_trace_csv(ref_path);
        const auto rows = kinematics_from_cycle(cycle, config.dt);
        const auto semi_trace = eval_semi_trace(semi, rows);
        const auto simple_trace = eval_simplified_trace(simple, rows);
        pairs.push_back({cycle.name() + ":semi_vs_reference", cycle.name(), "reference", "semi", ref, semi_trace});
        pairs.push_back(
            {cycle.name() + ":simplified_vs_semi", cycle.name(), "semi", "simplified", semi_trace, simple_trace});
        pairs.push_back({cycle.name() + ":simplified_vs_reference", cycle.name(), "reference", "simplified", ref,
                         simple_trace});
    }
    for (const auto& log_path : config.dyno_logs) {
        const auto profile = read_profile_csv(require(profile_path(config, log_path), "ingest"));
        const auto log = load_dyno_log(log_path);
        const auto dyno = dyno_reference_trace(log, profile);
        const auto name = log_path.stem().string();
        pairs.push_back({name + ":semi_vs_dyno", name, "dyno", "semi", dyno, eval_semi_trace(semi, profile.rows)});
        pairs.push_back(
            {name + ":simplified_vs_dyno", name, "dyno", "simplified", dyno, eval_simplified_trace(simple, profile.rows)});
    }
    return pairs;
}

Artifacts cmd_validate(const RunConfig& config) {
    const auto pairs = validation_pairs(config);
    const auto report = build_report(pairs, config.dt);
    const auto dir = ensure_dir(config.output_dir / artifact::kReport);
    const auto cmp_dir = ensure_dir(dir / "comparisons");
    const auto stamp = provenance_line(config);
    Artifacts written;

    json doc = report;
    doc["provenance"] = provenance(config);
    write_json(dir / "report.json", doc);
    written.push_back(dir / "report.json");
    write_text_file(dir / "report.txt", "# " + stamp + "\n" + format_report(report));
    written.push_back(dir / "report.txt");

    for (const auto& pair : pairs) {
        const auto aligned = align(pair.ref, pair.model, config.dt);
        const auto path = cmp_dir / comparison_file_name(pair.cycle, pair.model_id, pair.ref_id);
        write_comparison_csv(path, aligned, stamp);
        written.push_back(path);
    }

    if (config.svg) {
        const auto plot_dir = ensure_dir(dir / "plots");
        // One fuel-rate panel per cycle with every model that ran on it.
        std::map<std::string, std::vector<Series>> panels;
        for (const auto& pair : pairs) {
            auto& panel = panels[pair.cycle];
            const auto add = [&](const std::string& id, const Trace& trace) {
                for (const auto& s : panel) {
                    if (s.label == id) {
                        return;
                    }
                }
                Series s{id, trace.times(), trace.fuel()};
                panel.push_back(std::move(s));
            };
            add(pair.ref_id, pair.ref);
            add(pair.model_id, pair.model);
        }
        for (const auto& [cycle, series] : panels) {
            const auto path = plot_dir / (cycle + "_fuel_rate.svg");
            write_text_file(path, render_line_chart(cycle + " fuel rate", "time (s)", "fuel rate (g/s)", series));
            written.push_back(path);
        }
    }
    return written;
}

Artifacts cmd_pipeline(const RunConfig& config) {
    Artifacts all;
    for (const auto stage : {cmd_simulate, cmd_extract, cmd_fit_semi, cmd_fit_simplified, cmd_ingest, cmd_validate}) {
        auto written = stage(config);
        all.insert(all.end(), written.begin(), written.end());
    }
    return all;
}

void run_command(const std::string& name, const RunConfig& config, std::ostream& log) {
    Artifacts written;
    if (name == "simulate") {
        written = cmd_simulate(config);
    } else if (name == "extract") {
        written = cmd_extract(config);
    } else if (name == "fit-semi") {
        written = cmd_fit_semi(config);
    } else if (name == "fit-simplified") {
        written = cmd_fit_simplified(config);
    } else if (name == "ingest") {
        written = cmd_ingest(config);
    } else if (name == "validate") {
        written = cmd_validate(config);
    } else if (name == "pipeline") {
        written = cmd_pipeline(config);
    } else {
        throw ConfigError("unknown command '" + name + "'");
    }
    for (const auto& path : written) {
        log << "wrote " << path.string() << '\n';
    }
}

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const IoError*>(&e) ||
        dynamic_cast<const MissingPrerequisite*>(&e) || dynamic_cast<const ParseError*>(&e) ||
        dynamic_cast<const UnitError*>(&e)) {
        return 2;
    }
    return 1;
}

}  // namespace fuelred::cli
