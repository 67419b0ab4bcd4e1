#pragma once

#include "fuelred/drive_cycle.hpp"
#include "fuelred/dyno_ingest.hpp"
#include "fuelred/map_extraction.hpp"
#include "fuelred/simplified.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace fuelred::cli {

inline constexpr const char* kToolName = "fuelred";
inline constexpr const char* kToolVersion = "0.1.0";

// Caps on configurable polynomial degrees.
inline constexpr int kMaxSimplifiedDegree = 6;
inline constexpr int kMaxMapTotalDegree = 6;

/// Everything a pipeline run needs. Paths in the config file are relative
/// to the file's directory; they are stored resolved.
struct RunConfig {
    std::filesystem::path vehicle;
    std::vector<std::filesystem::path> cycles;
    SpeedUnit cycle_unit = SpeedUnit::mps;
    double dt = kDefaultDt;
    std::vector<std::filesystem::path> dyno_logs;
    std::filesystem::path output_dir;
    std::uint64_t seed = 2024;
    bool svg = false;

    MapFitOptions maps;
    TorqueCorrectionOptions correction;
    SimplifiedFitOptions simplified;
    IngestOptions ingest;

    // Canonical form of the effective settings, hashed for provenance.
    nlohmann::json canonical;
};

struct ConfigOverrides {
    std::optional<std::filesystem::path> output_dir;
    std::optional<std::string> unit;
    std::optional<double> dt;
};

/// Parses and validates a config document. Throws ConfigError for bad
/// values, UnitError for an unknown unit and MissingPrerequisite when a
/// referenced input file does not exist.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                           const ConfigOverrides& overrides = {});

/// Reads the config file; IoError when unreadable, ParseError on bad JSON.
RunConfig load_run_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// {"tool", "version", "config_hash"} stamped into every artifact.
nlohmann::json provenance(const RunConfig& config);
std::string provenance_line(const RunConfig& config);

}  // namespace fuelred::cli
