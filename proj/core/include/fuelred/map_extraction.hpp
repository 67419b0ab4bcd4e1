#pragma once

#include "fuelred/drive_cycle.hpp"
#include "fuelred/interp.hpp"
#include "fuelred/poly.hpp"
#include "fuelred/trace.hpp"
#include "fuelred/vehicle.hpp"

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace fuelred {

class SemiPrincipledModel;

struct ShiftEvent {
    std::string cycle;
    double t = 0.0;
    int from_gear = 0;
    int to_gear = 0;
    double v = 0.0;       // speed at the shift step
    double v_prev = 0.0;  // last speed held in from_gear
    double pedal = 0.0;

    friend bool operator==(const ShiftEvent&, const ShiftEvent&) = default;
};

/// Virtual chassis dynamometer output: one trace per cycle plus the shift
/// events found in them. Carries the principled vehicle constants needed to
/// recompute wheel force.
struct VcdDataset {
    VehicleParams params;
    std::vector<Trace> traces;
    std::vector<ShiftEvent> events;
};

struct VcdOptions {
    double dt = kDefaultDt;
    bool lock_torque_converter = false;
};

/// Simulates every cycle on flat grade and records shift events.
VcdDataset run_vcd(const Vehicle& vehicle, std::span<const DriveCycle> cycles, const VcdOptions& options = {});

/// Gear-change timesteps of one trace.
std::vector<ShiftEvent> detect_shift_events(const Trace& trace);

struct IdleConstants {
    double T_min = 0.0;   // Nm
    double f_idle = 0.0;  // g/s
};

struct FuelCutThresholds {
    double v_c = 0.0;   // m/s
    double F_wc = 0.0;  // N
};

/// Piecewise-constant downshift schedule: gear k is left for k-1 when speed
/// drops below cutoffs[k-1]. cutoffs[0] (first gear) is 0.
struct DownshiftMap {
    std::vector<double> cutoffs;
    std::vector<bool> interpolated;  // true where no events existed

    /// Highest gear whose cutoff does not exceed v.
    [[nodiscard]] int highest_gear(double v) const noexcept;

    friend bool operator==(const DownshiftMap&, const DownshiftMap&) = default;
};

struct ExtractedConstants {
    double T_min = 0.0;
    double f_idle = 0.0;
    double v_c = 0.0;
    double F_wc = 0.0;
    DownshiftMap K_downshift;
    Curve1D T_correction;  // Nm over m/s^2, first gear

    friend bool operator==(const ExtractedConstants&, const ExtractedConstants&) = default;
};

/// Mean torque and fuel over standstill steps whose +-1 s neighbourhood is
/// entirely standstill with torque rate below 0.01 Nm/s. Throws NoIdleData.
IdleConstants extract_idle_constants(const VcdDataset& ds);

/// 1st percentile of speed and 95th percentile of wheel force over moving
/// zero-fuel steps. Throws NoFuelCutData.
FuelCutThresholds extract_fuel_cut_thresholds(const VcdDataset& ds);

/// Median of the last speed held before each k -> k-1 event, per gear; gaps filled by interpolating
/// the equivalent engine speed between neighbours. Throws NoDownshiftData.
DownshiftMap extract_downshift_map(const VcdDataset& ds);

struct TorqueCorrectionOptions {
    int bins = 8;
    double a_min = -3.0;
    double a_max = 3.0;
};

/// Per-acceleration-bin mean of (reference torque - draft map torque) over
/// unclamped first-gear steps, as a curve over populated bin centres.
/// Throws NoFirstGearData.
Curve1D extract_torque_correction(const VcdDataset& ds, const SemiPrincipledModel& draft,
                                  const TorqueCorrectionOptions& options = {});

struct MapFitOptions {
    PolyDegree fuel_degree{2, 2};
    PolyDegree speed_degree{1, 1};
    PolyDegree torque_degree{1, 1};
    std::size_t min_samples = 50;
    int max_total_degree = 4;
    // Torque floor used to drop clamped rows from the torque fits; NaN
    // means the minimum torque seen in the dataset.
    double torque_floor = std::numeric_limits<double>::quiet_NaN();
};

struct FittedMaps {
    PolyFit fuel;                      // fuel(N, T)
    std::vector<PolyFit> engine_speed; // per gear N(N_output, F_wheel)
    std::vector<PolyFit> engine_torque;// per gear T(N_output, F_wheel)
};

/// Fits the fuel map on fuelled moving steps and the per-gear engine speed
/// and torque maps on steps where the engine is not at a clamp. Throws
/// InsufficientGearData.
FittedMaps fit_all_maps(const VcdDataset& ds, const MapFitOptions& options = {});

void to_json(nlohmann::json& j, const ShiftEvent& e);
void from_json(const nlohmann::json& j, ShiftEvent& e);
void to_json(nlohmann::json& j, const DownshiftMap& m);
void from_json(const nlohmann::json& j, DownshiftMap& m);
void to_json(nlohmann::json& j, const ExtractedConstants& c);
void from_json(const nlohmann::json& j, ExtractedConstants& c);

}  // namespace fuelred
