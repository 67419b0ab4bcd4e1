#pragma once

#include "fuelred/trace.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace fuelred {

/// Two traces sampled on the common uniform grid over their overlap.
struct AlignedPair {
    std::vector<double> t;
    Trace a;
    Trace b;
};

/// Linear interpolation of continuous columns, nearest sample for gear and
/// flag. Throws NoOverlap when the time ranges do not intersect and
/// InvalidDt for a non-positive step.
AlignedPair align(const Trace& a, const Trace& b, double dt);

/// Mean absolute difference. Throws LengthMismatch (also for empty input).
double mae(std::span<const double> a, std::span<const double> b);

struct CumulativeFuel {
    double total = 0.0;           // g
    std::vector<double> running;  // g, one entry per sample
};

/// Trapezoidal integral of fuel over t.
CumulativeFuel cumulative_fuel(std::span<const double> t, std::span<const double> fuel);
CumulativeFuel cumulative_fuel(const Trace& trace);

/// 100 |model - ref| / ref. Throws ZeroReference when ref <= 0.
double cumulative_error_pct(double ref_total, double model_total);
double cumulative_error_pct(const Trace& ref, const Trace& model);

struct GearMetrics {
    double mae_gear = 0.0;
    double mismatch_pct = 0.0;
};

GearMetrics gear_metrics(std::span<const int> ref, std::span<const int> model);

/// One reference/model comparison to report.
struct ValidationPair {
    std::string name;  // record key; unique per report
    std::string cycle;
    std::string ref_id;
    std::string model_id;
    Trace ref;
    Trace model;
};

struct PairMetrics {
    std::string cycle;
    std::string ref_id;
    std::string model_id;
    double dt = 0.0;
    std::size_t steps = 0;
    double mae_fuel = 0.0;           // g/s
    double cumulative_fuel_ref = 0.0;    // g
    double cumulative_fuel_model = 0.0;  // g
    double cumulative_error_pct = 0.0;
    // Internal dynamics, only when both traces carry them.
    std::optional<double> mae_engine_speed;   // rpm
    std::optional<double> mae_engine_torque;  // Nm
    std::optional<double> mae_pedal;          // percent
    std::optional<double> mae_gear;
    std::optional<double> gear_mismatch_pct;

    friend bool operator==(const PairMetrics&, const PairMetrics&) = default;
};

PairMetrics compare(const AlignedPair& aligned, double dt);

struct ValidationReport {
    double dt = 0.0;
    std::map<std::string, PairMetrics> pairs;

    friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

/// Metrics for every pair on its aligned grid. Throws ConfigError for an
/// empty list or duplicate names, and propagates alignment errors.
ValidationReport build_report(std::span<const ValidationPair> pairs, double dt);

/// Fixed-width text table of the report.
std::string format_report(const ValidationReport& report);

/// Per-timestep comparison (fuel rate, cumulative fuel, gear, engine speed
/// in rpm, torque) for plotting. Dynamics columns are left empty when a
/// trace does not carry them.
void write_comparison_csv(const std::filesystem::path& path, const AlignedPair& aligned,
                          const std::string& comment = {});

/// `<cycle>_<model>_vs_<ref>.csv`
std::string comparison_file_name(const std::string& cycle, const std::string& model_id, const std::string& ref_id);

void to_json(nlohmann::json& j, const PairMetrics& m);
void from_json(const nlohmann::json& j, PairMetrics& m);
void to_json(nlohmann::json& j, const ValidationReport& r);
void from_json(const nlohmann::json& j, ValidationReport& r);

}  // namespace fuelred
