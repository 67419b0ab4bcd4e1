#pragma once

#include "cli/run_config.hpp"

#include "fuelred/validation.hpp"

#include <exception>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace fuelred::cli {

// Artifact locations inside the output directory.
namespace artifact {
inline constexpr const char* kTraces = "traces";
inline constexpr const char* kLockedTraces = "traces_locked";
inline constexpr const char* kExtraction = "extraction.json";
inline constexpr const char* kSemiModel = "semi_model.json";
inline constexpr const char* kSimplifiedModel = "simplified_model.json";
inline constexpr const char* kProfiles = "profiles";
inline constexpr const char* kReport = "report";
}  // namespace artifact

using Artifacts = std::vector<std::filesystem::path>;

/// Reference traces per cycle, standard and with the torque converter locked.
Artifacts cmd_simulate(const RunConfig& config);

/// Extracted constants and shift events from the simulated traces.
Artifacts cmd_extract(const RunConfig& config);

/// semi_model.json from the extracted constants and the locked traces.
Artifacts cmd_fit_semi(const RunConfig& config);

/// simplified_model.json from semi_model.json.
Artifacts cmd_fit_simplified(const RunConfig& config);

/// Processed (t, v, a) profiles plus provenance sidecars per dyno log.
Artifacts cmd_ingest(const RunConfig& config);

/// Validation pairs assembled from the stage artifacts.
std::vector<ValidationPair> validation_pairs(const RunConfig& config);

/// report.json, report.txt, comparison CSVs and optional SVG plots.
Artifacts cmd_validate(const RunConfig& config);

/// Every stage in order.
Artifacts cmd_pipeline(const RunConfig& config);

/// Runs one subcommand by name, logging written artifacts to `log`.
void run_command(const std::string& name, const RunConfig& config, std::ostream& log);

/// 2 for configuration, IO and missing-prerequisite errors, 1 otherwise.
int exit_code_for(const std::exception& e) noexcept;

}  // namespace fuelred::cli
