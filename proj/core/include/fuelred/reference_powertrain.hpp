#pragma once

#include "fuelred/drive_cycle.hpp"
#include "fuelred/trace.hpp"
#include "fuelred/vehicle.hpp"

#include <functional>

namespace fuelred {

inline constexpr double kStandstillSpeed = 0.1;  // m/s

/// R_g + R_r v + R_a v^2. Negative speeds are treated as 0.
[[nodiscard]] double road_load(const VehicleParams& p, double v) noexcept;

/// m_general[gear] a + road_load(v) + m_vehicle g sin(grade).
/// Throws GearOutOfRange.
[[nodiscard]] double wheel_force(const VehicleParams& p, double v, double a, double grade, int gear);

/// v d_r / r_tire, rad/s.
[[nodiscard]] double transmission_output_speed(const VehicleParams& p, double v) noexcept;

/// One shift decision with strict inequalities: upshift when v exceeds the
/// upshift threshold of prev_gear, downshift when v falls below its
/// downshift threshold, otherwise hold.
[[nodiscard]] int select_gear(const GearShiftMaps& maps, int n_gears, int prev_gear, double v, double pedal);

using GradeProfile = std::function<double(double t)>;

struct SimulationOptions {
    double dt = kDefaultDt;
    GradeProfile grade;  // empty = flat road
    // Disables the first-gear torque-converter correction, the customized
    // "steady" configuration used when harvesting maps.
    bool lock_torque_converter = false;
};

/// Quasi-static forward simulation of the reference powertrain following the
/// cycle exactly. The cycle is resampled onto the dt grid first.
[[nodiscard]] Trace simulate(const DriveCycle& cycle, const Vehicle& vehicle,
                             const SimulationOptions& options = {});

/// Reference powertrain bundled with its derived wheel-torque curves, so
/// repeated simulations do not rebuild them.
class ReferencePowertrain {
public:
    explicit ReferencePowertrain(Vehicle vehicle);

    [[nodiscard]] Trace simulate(const DriveCycle& cycle, const SimulationOptions& options = {}) const;

    [[nodiscard]] const Vehicle& vehicle() const noexcept { return vehicle_; }
    [[nodiscard]] const WheelTorqueCurves& wheel_torque() const noexcept { return wheel_torque_; }

    // pedal = 100 T_wheel / T_wmax(v), clamped to [0, 100].
    [[nodiscard]] double pedal(double force, double v) const noexcept;

private:
    Vehicle vehicle_;
    WheelTorqueCurves wheel_torque_;
};

}  // namespace fuelred
