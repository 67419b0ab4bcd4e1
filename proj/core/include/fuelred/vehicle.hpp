#pragma once

#include "fuelred/interp.hpp"

#include <filesystem>
#include <vector>

#include "json.hpp"

namespace fuelred {

/// Principled vehicle constants. Gears are 1-based in every public
/// function; the per-gear vectors are indexed by gear - 1.
struct VehicleParams {
    double m_vehicle = 0.0;           // kg
    std::vector<double> m_general;    // kg, per gear (includes driveline inertia)
    double r_tire = 0.0;              // m
    double d_r = 0.0;                 // final drive ratio
    std::vector<double> g_r;          // gear ratios, strictly decreasing
    double R_a = 0.0;                 // N s^2/m^2
    double R_r = 0.0;                 // N s/m
    double R_g = 0.0;                 // N
    double N_max = 0.0;               // rad/s
    double N_min = 0.0;               // rad/s

    [[nodiscard]] int n_gears() const noexcept { return static_cast<int>(g_r.size()); }
    [[nodiscard]] double gear_ratio(int gear) const;
    [[nodiscard]] double general_mass(int gear) const;

    // Highest speed reachable in top gear without exceeding N_max.
    [[nodiscard]] double top_speed() const noexcept;

    void validate() const;

    friend bool operator==(const VehicleParams&, const VehicleParams&) = default;
};

struct WillansCoefficients {
    double k1 = 0.0;   // fuel power per brake power
    double k2 = 0.0;   // W per rad/s (friction)
    double k3 = 0.0;   // W (idle overhead)
    double lhv = 42600.0;  // J/g
};

/// Tabulated engine fuel rate over (N, T), evaluated by bilinear
/// interpolation with end-value hold.
class EngineFuelMap {
public:
    EngineFuelMap() = default;
    EngineFuelMap(std::vector<double> n_grid, std::vector<double> t_grid, std::vector<double> fuel);

    static EngineFuelMap from_willans(const WillansCoefficients& k, std::vector<double> n_grid,
                                      std::vector<double> t_grid);

    [[nodiscard]] double operator()(double n, double t) const noexcept;

    [[nodiscard]] const std::vector<double>& n_grid() const noexcept { return n_grid_; }
    [[nodiscard]] const std::vector<double>& t_grid() const noexcept { return t_grid_; }
    // Row-major, fuel[i * t_grid.size() + j] at (n_grid[i], t_grid[j]).
    [[nodiscard]] const std::vector<double>& table() const noexcept { return fuel_; }

    friend bool operator==(const EngineFuelMap&, const EngineFuelMap&) = default;

private:
    std::vector<double> n_grid_;
    std::vector<double> t_grid_;
    std::vector<double> fuel_;
};

/// Speed thresholds of the automatic gearbox indexed by pedal position.
/// upshift[i][k-1] is the speed above which gear k shifts to k+1 at
/// pedal_grid[i] (k = 1..n-1); downshift[i][k-2] is the speed below which
/// gear k shifts to k-1 (k = 2..n). Values between pedal grid points are
/// interpolated linearly.
struct GearShiftMaps {
    std::vector<double> pedal_grid;                 // percent, ascending
    std::vector<std::vector<double>> upshift;       // m/s
    std::vector<std::vector<double>> downshift;     // m/s
    Curve1D torque_max;                             // Nm over rad/s

    [[nodiscard]] double v_upshift(double pedal, int gear) const;
    [[nodiscard]] double v_downshift(double pedal, int gear) const;

    /// Gear the upshift schedule settles in for a given pedal and speed,
    /// starting from first gear (the K_upshift map).
    [[nodiscard]] int upshift_gear(double pedal, double v) const;

    void validate(int n_gears) const;

    friend bool operator==(const GearShiftMaps&, const GearShiftMaps&) = default;
};

/// Settings specific to the reference simulator (not visible to the
/// reduced models, which must recover them from simulated data).
struct ReferenceSettings {
    double eta = 0.92;              // driveline efficiency
    double idle_torque = 10.0;      // Nm, minimum engine torque
    double idle_fuel = 0.2;         // g/s
    double fuel_cut_speed = 3.0;    // m/s
    double fuel_cut_force = -150.0; // N
    Curve1D torque_correction;      // Nm over m/s^2, first gear only

    friend bool operator==(const ReferenceSettings&, const ReferenceSettings&) = default;
};

struct Vehicle {
    VehicleParams params;
    EngineFuelMap fuel_map;
    GearShiftMaps shift;
    ReferenceSettings reference;

    void validate() const;

    friend bool operator==(const Vehicle&, const Vehicle&) = default;
};

/// Maximum wheel torque curves derived from T_max(N), gear ratios and
/// driveline efficiency, tabulated over speed.
struct WheelTorqueCurves {
    Curve1D overall;              // T_wmax(v), Nm
    std::vector<Curve1D> by_gear; // T_wmax(v, k), Nm

    friend bool operator==(const WheelTorqueCurves&, const WheelTorqueCurves&) = default;
};

WheelTorqueCurves derive_wheel_torque_curves(const VehicleParams& params, const Curve1D& torque_max,
                                             double eta, double speed_step = 0.25);

// JSON (vehicle.json schema, see README).
void to_json(nlohmann::json& j, const VehicleParams& p);
void from_json(const nlohmann::json& j, VehicleParams& p);
void to_json(nlohmann::json& j, const Curve1D& c);
void from_json(const nlohmann::json& j, Curve1D& c);
void to_json(nlohmann::json& j, const EngineFuelMap& m);
void from_json(const nlohmann::json& j, EngineFuelMap& m);
void to_json(nlohmann::json& j, const GearShiftMaps& m);
void from_json(const nlohmann::json& j, GearShiftMaps& m);
void to_json(nlohmann::json& j, const ReferenceSettings& s);
void from_json(const nlohmann::json& j, ReferenceSettings& s);
void to_json(nlohmann::json& j, const Vehicle& v);
void from_json(const nlohmann::json& j, Vehicle& v);
void to_json(nlohmann::json& j, const WheelTorqueCurves& c);
void from_json(const nlohmann::json& j, WheelTorqueCurves& c);

Vehicle load_vehicle(const std::filesystem::path& path);
void save_vehicle(const std::filesystem::path& path, const Vehicle& vehicle);

}  // namespace fuelred
