#pragma once

#include "fuelred/errors.hpp"
#include "fuelred/trace.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace fuelred {

/// One row of a raw chassis-dynamometer log, in logger units.
struct DynoRow {
    double t = 0.0;                // s
    double v_kph = 0.0;            // km/h, 1 km/h resolution
    double engine_rpm = 0.0;
    double engine_torque_nm = 0.0;
    double pedal_pct = 0.0;
    double fuel_gps = 0.0;
    double water_temp_c = 0.0;
    int gear = 0;
    double trans_out_rpm = 0.0;

    friend bool operator==(const DynoRow&, const DynoRow&) = default;
};

struct DynoLog {
    std::string name;
    std::vector<DynoRow> rows;

    /// Throws MonotonicityError for decreasing time, ParseError for negative
    /// fuel or non-finite water temperature.
    void validate() const;
};

inline constexpr const char* kDynoHeader =
    "t,v_kph,engine_rpm,engine_torque_nm,pedal_pct,fuel_gps,water_temp_c,gear,trans_out_rpm";

DynoLog parse_dyno_log(std::string_view text, const std::string& name);
DynoLog load_dyno_log(const std::filesystem::path& path);
void write_dyno_log(const std::filesystem::path& path, const DynoLog& log);

/// Through-origin least squares of v_kph on trans_out_rpm over rows with
/// v_kph > 0, in (km/h)/rpm. Throws InsufficientData (< min_rows usable
/// rows) and NonPositiveSlope.
double fit_speed_regression(const DynoLog& log, std::size_t min_rows = 100);

/// max(0, slope * trans_out_rpm) converted to m/s, one value per row.
std::vector<double> derive_speed(const DynoLog& log, double slope);

/// Repeated three-point weighted average of the interior points; every
/// pass reads the previous pass only. Endpoints are left unchanged.
/// Throws SeriesTooShort for fewer than 3 samples.
std::vector<double> smooth_speed(std::span<const double> series, double mu, int steps);

/// Central differences interior, one-sided at the ends.
std::vector<double> derive_acceleration(std::span<const double> series, double dt);

/// Winsorizes at the fraction and 1 - fraction percentiles.
std::vector<double> clip_outliers(std::span<const double> accel, double fraction = 0.05);

struct SmoothingResult {
    int steps = 0;
    std::vector<double> speed;
    std::vector<double> accel;
    double max_abs_accel = 0.0;
    bool within_bound = false;  // false when smoothing converged above the bound
};

class BoundNotReached : public Error {
public:
    BoundNotReached(const std::string& message, SmoothingResult best)
        : Error("BoundNotReached", message), best_(std::move(best)) {}

    [[nodiscard]] const SmoothingResult& best() const noexcept { return best_; }

private:
    SmoothingResult best_;
};

/// Smallest number of smoothing passes for which max|a| <= bound, or at
/// which one more pass improves max|a| by less than 1e-3 m/s^2. Throws
/// BoundNotReached after max_steps passes, SmoothingDiverged if a pass
/// increases max|a|.
SmoothingResult auto_select_smoothing(std::span<const double> series, double dt, double bound = 4.0,
                                      int max_steps = 2000, double mu = 0.5);

struct TimeWindow {
    double start = 0.0;
    double end = 0.0;
};

/// [t*, t_end] where t* is the first time after which the water temperature
/// never drops below the threshold. Throws NeverHot.
TimeWindow hot_engine_window(const DynoLog& log, double threshold_c = 85.0);

struct IngestOptions {
    double dt = 0.1;
    double mu = 0.5;
    double accel_bound = 4.0;
    int max_smoothing_steps = 2000;
    double clip_fraction = 0.05;
    double hot_threshold_c = 85.0;
    bool hot_window = true;
    std::size_t min_regression_rows = 100;
};

struct IngestProvenance {
    double slope = 0.0;  // (km/h)/rpm
    int smoothing_steps = 0;
    double mu = 0.0;
    double clip_fraction = 0.0;
    double dt = 0.0;
    double window_start = 0.0;
    double window_end = 0.0;
    double raw_max_abs_accel = 0.0;
    double smoothed_max_abs_accel = 0.0;
    bool within_bound = false;
    std::size_t bound_clamped = 0;  // samples clamped to the bound after clipping

    friend bool operator==(const IngestProvenance&, const IngestProvenance&) = default;
};

struct ProcessedProfile {
    std::string name;
    std::vector<KinematicRow> rows;
    IngestProvenance provenance;
};

/// Full pipeline: hot window, speed regression, resampling onto a uniform
/// grid, automatic smoothing, differentiation, winsorizing and a final
/// clamp to the acceleration bound.
ProcessedProfile ingest_dyno_log(const DynoLog& log, const IngestOptions& options = {});

/// Dyno measurements resampled onto the profile's time grid, for comparing
/// models driven by that profile. Gear uses the nearest sample.
Trace dyno_reference_trace(const DynoLog& log, const ProcessedProfile& profile);

void write_profile_csv(const std::filesystem::path& path, const ProcessedProfile& profile,
                       const std::string& comment = {});
ProcessedProfile read_profile_csv(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const IngestProvenance& p);
void from_json(const nlohmann::json& j, IngestProvenance& p);

}  // namespace fuelred
