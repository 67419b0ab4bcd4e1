#pragma once

#include "fuelred/map_extraction.hpp"
#include "fuelred/reference_powertrain.hpp"
#include "fuelred/trace.hpp"
#include "fuelred/vehicle.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace fuelred {

struct SemiOutput {
    int gear = 1;
    double engine_speed = 0.0;   // rad/s
    double engine_torque = 0.0;  // Nm
    double pedal = 0.0;          // percent
    double fuel = 0.0;           // g/s
    double wheel_force = 0.0;    // N
    bool clamped = false;        // input outside the domain or force above T_wmax
    bool saturated = false;      // demand beyond what the engine can deliver
};

/// Principled inputs taken directly from the reference vehicle: constants,
/// the upshift schedule, T_max(N) and the maximum wheel torque curves.
struct PrincipledInputs {
    VehicleParams params;
    std::vector<double> pedal_grid;
    std::vector<std::vector<double>> upshift;  // same layout as GearShiftMaps::upshift
    Curve1D torque_max;
    WheelTorqueCurves wheel_torque;

    static PrincipledInputs from_vehicle(const Vehicle& vehicle);
};

struct SemiMetadata {
    std::vector<std::string> source_cycles;
    double fuel_rms = 0.0;
    std::vector<double> speed_rms;
    std::vector<double> torque_rms;
};

/// Stateless fuel model: every output is a pure function of (v, a, grade).
class SemiPrincipledModel {
public:
    static constexpr double kMaxAbsAccel = 5.0;   // m/s^2
    static constexpr double kMaxAbsGrade = 0.15;  // rad

    SemiPrincipledModel(PrincipledInputs principled, ExtractedConstants constants, PolyMap2D fuel_map,
                        std::vector<PolyMap2D> speed_maps, std::vector<PolyMap2D> torque_maps,
                        SemiMetadata metadata = {});

    [[nodiscard]] SemiOutput eval(double v, double a, double grade) const;

    /// Stateless gear choice. Accelerating or cruising uses the upshift
    /// schedule at the estimated pedal; decelerating holds the highest gear
    /// the extracted downshift cutoffs allow, never below the upshift choice.
    [[nodiscard]] int select_gear(double v, double a, double grade) const;

    /// Per-gear torque map without correction or clamping.
    [[nodiscard]] double map_torque(int gear, double n_output, double force) const;

    [[nodiscard]] double max_speed() const noexcept { return v_max_; }
    [[nodiscard]] const PrincipledInputs& principled() const noexcept { return principled_; }
    [[nodiscard]] const ExtractedConstants& constants() const noexcept { return constants_; }
    [[nodiscard]] const PolyMap2D& fuel_map() const noexcept { return fuel_map_; }
    [[nodiscard]] const std::vector<PolyMap2D>& speed_maps() const noexcept { return speed_maps_; }
    [[nodiscard]] const std::vector<PolyMap2D>& torque_maps() const noexcept { return torque_maps_; }
    [[nodiscard]] const SemiMetadata& metadata() const noexcept { return metadata_; }

    [[nodiscard]] SemiPrincipledModel with_torque_correction(Curve1D correction) const;

private:
    [[nodiscard]] double pedal_for(double force, double v) const noexcept;

    PrincipledInputs principled_;
    ExtractedConstants constants_;
    PolyMap2D fuel_map_;
    std::vector<PolyMap2D> speed_maps_;
    std::vector<PolyMap2D> torque_maps_;
    SemiMetadata metadata_;
    GearShiftMaps upshift_;  // downshift tables unused
    double v_max_ = 0.0;
};

/// Row-wise evaluation; no state is carried between rows.
Trace eval_semi_trace(const SemiPrincipledModel& model, std::span<const KinematicRow> rows,
                      const GradeProfile& grade = {});

struct ExtractionOptions {
    double dt = kDefaultDt;
    MapFitOptions maps;
    TorqueCorrectionOptions correction;
};

/// Full campaign: maps are fitted on the locked-converter VCD run; idle,
/// fuel-cut and downshift constants come from the standard run, and the
/// first-gear torque correction is the standard run's residual against the
/// draft model.
SemiPrincipledModel derive_semi_model(const Vehicle& vehicle, std::span<const DriveCycle> cycles,
                                      const ExtractionOptions& options = {});

/// Fits the maps on the locked-converter dataset and combines them with
/// constants extracted earlier.
SemiPrincipledModel assemble_semi_model(const PrincipledInputs& principled, const ExtractedConstants& constants,
                                        const VcdDataset& locked, const MapFitOptions& options = {});

/// Same campaign on datasets that were already simulated.
SemiPrincipledModel derive_semi_model(const PrincipledInputs& principled, const VcdDataset& standard,
                                      const VcdDataset& locked, const ExtractionOptions& options = {});

void to_json(nlohmann::json& j, const SemiPrincipledModel& m);
SemiPrincipledModel semi_model_from_json(const nlohmann::json& j);

void save_semi_model(const std::filesystem::path& path, const SemiPrincipledModel& model,
                     const nlohmann::json& provenance = {});
SemiPrincipledModel load_semi_model(const std::filesystem::path& path);

}  // namespace fuelred
