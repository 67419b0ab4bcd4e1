#include "cli/commands.hpp"
#include "cli/run_config.hpp"
#include "support/campaign.hpp"

#include "fuelred/errors.hpp"
#include "fuelred/reference_powertrain.hpp"
#include "fuelred/semi_principled.hpp"
#include "fuelred/vehicle.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace fuelred;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::string& command) {
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Shipped-style dataset written by the data generator into dir/data.
fs::path make_dataset(const fs::path& dir) {
    const auto data = dir / "data";
    const int code = run(std::string(FUELRED_MAKE_DATA_EXE) + " --out " + data.string() + " > /dev/null");
    if (code != 0) {
        throw std::runtime_error("data generator failed");
    }
    return data;
}

json read_json(const fs::path& path) { return json::parse(test_support::read_file(path)); }

void write_config(const fs::path& path, const json& doc) {
    std::ofstream(path) << doc.dump(2);
}

cli::RunConfig single_cycle_config(const fs::path& data, const fs::path& out) {
    auto doc = read_json(data / "config.json");
    doc["cycles"] = json::array({"cycles/wltc_like.csv"});
    doc.erase("dyno_logs");
    doc["svg"] = false;
    cli::ConfigOverrides o;
    o.output_dir = out;
    return cli::parse_run_config(doc, data, o);
}

}  // namespace

TEST(Cli, MissingVehicleExitsWithTwo) {
    test_support::TempDir dir("cli_missing");
    const auto data = make_dataset(dir.path());
    auto doc = read_json(data / "config.json");
    doc["vehicle"] = "no_such_vehicle.json";
    write_config(data / "bad.json", doc);
    const auto err = dir.path() / "stderr.txt";
    const int code = run(std::string(FUELRED_EXE) + " --config " + (data / "bad.json").string() + " simulate 2> " +
                         err.string() + " > /dev/null");
    EXPECT_EQ(code, 2);
    EXPECT_NE(test_support::read_file(err).find("no_such_vehicle.json"), std::string::npos);
}

TEST(Cli, UnknownSubcommandAndMissingConfigAreUsageErrors) {
    EXPECT_EQ(run(std::string(FUELRED_EXE) + " simulate > /dev/null 2>&1"), 2);
    EXPECT_EQ(run(std::string(FUELRED_EXE) + " --config x.json frobnicate > /dev/null 2>&1"), 2);
}

TEST(Cli, SimulateWritesOneTracePerCycleDeterministically) {
    test_support::TempDir dir("cli_sim");
    const auto data = make_dataset(dir.path());
    cli::ConfigOverrides o;
    o.output_dir = dir.path() / "out1";
    const auto first = cli::load_run_config(data / "config.json", o);
    o.output_dir = dir.path() / "out2";
    const auto second = cli::load_run_config(data / "config.json", o);
    cli::cmd_simulate(first);
    cli::cmd_simulate(second);
    for (const auto& cycle : first.cycles) {
        const auto name = cycle.stem().string() + ".csv";
        const auto a = test_support::read_file(first.output_dir / cli::artifact::kTraces / name);
        EXPECT_FALSE(a.empty());
        EXPECT_EQ(a, test_support::read_file(second.output_dir / cli::artifact::kTraces / name));
        EXPECT_EQ(a.rfind("# " + cli::provenance_line(first), 0), 0u) << "provenance header in " << name;
    }
    EXPECT_EQ(std::distance(fs::directory_iterator(first.output_dir / cli::artifact::kTraces), fs::directory_iterator()),
              static_cast<long>(first.cycles.size()));
}

TEST(Cli, FitSimplifiedWithoutSemiModelNamesTheArtifact) {
    test_support::TempDir dir("cli_prereq");
    const auto data = make_dataset(dir.path());
    const auto config = single_cycle_config(data, dir.path() / "empty_out");
    try {
        cli::cmd_fit_simplified(config);
        FAIL() << "expected MissingPrerequisite";
    } catch (const MissingPrerequisite& e) {
        EXPECT_NE(std::string(e.what()).find(cli::artifact::kSemiModel), std::string::npos);
        EXPECT_EQ(cli::exit_code_for(e), 2);
    }
    EXPECT_EQ(run(std::string(FUELRED_EXE) + " --config " + (data / "config.json").string() + " --out " +
                  (dir.path() / "empty_out").string() + " fit-simplified > /dev/null 2>&1"),
              2);
}

TEST(Cli, ValidateMatchesLibraryReport) {
    test_support::TempDir dir("cli_validate");
    const auto data = make_dataset(dir.path());
    const auto config = single_cycle_config(data, dir.path() / "out");
    cli::cmd_pipeline(config);

    // Library-level recomputation of the semi-vs-reference pair.
    const auto vehicle = load_vehicle(config.vehicle);
    const auto cycle = load_cycle(config.cycles.front(), config.cycle_unit);
    SimulationOptions opts;
    opts.dt = config.dt;
    const auto ref = simulate(cycle, vehicle, opts);
    const auto semi = load_semi_model(config.output_dir / cli::artifact::kSemiModel);
    const auto model = eval_semi_trace(semi, kinematics_from_cycle(cycle, config.dt));
    const std::vector<ValidationPair> pairs{{"wltc_like:semi_vs_reference", "wltc_like", "reference", "semi", ref,
                                             model}};
    const auto expected = build_report(pairs, config.dt).pairs.at("wltc_like:semi_vs_reference");

    const auto doc = read_json(config.output_dir / cli::artifact::kReport / "report.json");
    auto report = doc;
    report.erase("provenance");
    const auto got = report.get<ValidationReport>().pairs.at("wltc_like:semi_vs_reference");
    EXPECT_EQ(got, expected);
    EXPECT_TRUE(doc.contains("provenance"));
}

TEST(Cli, PipelineSmokeThroughExecutable) {
    test_support::TempDir dir("cli_pipeline");
    const auto data = make_dataset(dir.path());
    const auto out = dir.path() / "out";
    EXPECT_EQ(run(std::string(FUELRED_EXE) + " --config " + (data / "config.json").string() + " --out " +
                  out.string() + " pipeline > /dev/null"),
              0);
    for (const char* name : {cli::artifact::kExtraction, cli::artifact::kSemiModel, cli::artifact::kSimplifiedModel}) {
        EXPECT_TRUE(read_json(out / name).contains("provenance")) << name;
    }
    EXPECT_TRUE(fs::exists(out / cli::artifact::kReport / "report.txt"));
    EXPECT_TRUE(fs::exists(out / cli::artifact::kReport / "comparisons" / "hwfet_like_semi_vs_reference.csv"));
    EXPECT_TRUE(fs::exists(out / cli::artifact::kProfiles / "hwfet_like_dyno.csv"));
}

TEST(RunConfig, RejectsBadSettings) {
    test_support::TempDir dir("cli_config");
    const auto data = make_dataset(dir.path());
    const auto base = read_json(data / "config.json");
    auto with = [&](const std::function<void(json&)>& edit) {
        auto doc = base;
        edit(doc);
        return doc;
    };
    EXPECT_NO_THROW(cli::parse_run_config(base, data));
    EXPECT_THROW(cli::parse_run_config(with([](json& d) { d["bogus"] = 1; }), data), ConfigError);
    EXPECT_THROW(cli::parse_run_config(with([](json& d) { d["dt"] = 0.0; }), data), ConfigError);
    EXPECT_THROW(cli::parse_run_config(with([](json& d) { d["cycle_unit"] = "furlong"; }), data), UnitError);
    EXPECT_THROW(cli::parse_run_config(with([](json& d) { d["cycles"] = json::array(); }), data), ConfigError);
    EXPECT_THROW(cli::parse_run_config(with([](json& d) { d["cycles"] = {"cycles/none.csv"}; }), data),
                 MissingPrerequisite);
    EXPECT_THROW(
        cli::parse_run_config(with([](json& d) { d["simplified"] = {{"degrees", {{"C", 9}}}}; }), data),
        ConfigError);
    EXPECT_THROW(
        cli::parse_run_config(with([](json& d) { d["extraction"] = {{"fuel_degree", {4, 4}}}; }), data),
        ConfigError);
    EXPECT_THROW(cli::parse_run_config(with([](json& d) { d["ingest"] = {{"mu", 2.0}}; }), data), ConfigError);
    EXPECT_THROW(cli::load_run_config(dir.path() / "absent.json"), IoError);
}

TEST(RunConfig, OverridesAndProvenanceHash) {
    test_support::TempDir dir("cli_override");
    const auto data = make_dataset(dir.path());
    const auto base = cli::load_run_config(data / "config.json");
    EXPECT_EQ(base.output_dir, (data / "../out").lexically_normal());

    cli::ConfigOverrides o;
    o.dt = 0.2;
    o.unit = "kph";
    const auto over = cli::load_run_config(data / "config.json", o);
    EXPECT_EQ(over.dt, 0.2);
    EXPECT_EQ(over.ingest.dt, 0.2);
    EXPECT_EQ(over.cycle_unit, SpeedUnit::kph);
    EXPECT_NE(cli::provenance(over).at("config_hash"), cli::provenance(base).at("config_hash"));
    EXPECT_EQ(cli::provenance(cli::load_run_config(data / "config.json")), cli::provenance(base));
}

TEST(Fnv, KnownVectors) {
    EXPECT_EQ(cli::fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(cli::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(ExitCodes, Mapping) {
    EXPECT_EQ(cli::exit_code_for(ConfigError("x")), 2);
    EXPECT_EQ(cli::exit_code_for(IoError("x")), 2);
    EXPECT_EQ(cli::exit_code_for(RankDeficient("x")), 1);
    EXPECT_EQ(cli::exit_code_for(std::runtime_error("x")), 1);
}
