#include "fuelred/reference_powertrain.hpp"

#include "fuelred/errors.hpp"
#include "fuelred/interp.hpp"
#include "fuelred/units.hpp"

#include <algorithm>
#include <cmath>

namespace fuelred {

double road_load(const VehicleParams& p, double v) noexcept {
    v = std::max(v, 0.0);
    return p.R_g + p.R_r * v + p.R_a * v * v;
}

double wheel_force(const VehicleParams& p, double v, double a, double grade, int gear) {
    return p.general_mass(gear) * a + road_load(p, v) + p.m_vehicle * units::kGravity * std::sin(grade);
}

double transmission_output_speed(const VehicleParams& p, double v) noexcept {
    return v * p.d_r / p.r_tire;
}

int select_gear(const GearShiftMaps& maps, int n_gears, int prev_gear, double v, double pedal) {
    if (prev_gear < 1 || prev_gear > n_gears) {
        throw GearOutOfRange("previous gear " + std::to_string(prev_gear) + " outside [1, " +
                             std::to_string(n_gears) + "]");
    }
    if (prev_gear < n_gears && v > maps.v_upshift(pedal, prev_gear)) {
        return prev_gear + 1;
    }
    if (prev_gear > 1 && v < maps.v_downshift(pedal, prev_gear)) {
        return prev_gear - 1;
    }
    return prev_gear;
}

ReferencePowertrain::ReferencePowertrain(Vehicle vehicle) : vehicle_(std::move(vehicle)) {
    vehicle_.validate();
    wheel_torque_ = derive_wheel_torque_curves(vehicle_.params, vehicle_.shift.torque_max, vehicle_.reference.eta);
}

double ReferencePowertrain::pedal(double force, double v) const noexcept {
    const double limit = wheel_torque_.overall(v);
    if (!(limit > 0.0)) {
        return 0.0;
    }
    return std::clamp(100.0 * force * vehicle_.params.r_tire / limit, 0.0, 100.0);
}

Trace ReferencePowertrain::simulate(const DriveCycle& cycle, const SimulationOptions& options) const {
    const auto grid = resample(cycle, options.dt);
    const auto speeds = grid.speeds();
    const auto accels = finite_difference(speeds, options.dt);

    const auto& p = vehicle_.params;
    const auto& ref = vehicle_.reference;
    const int n_gears = p.n_gears();

    Trace trace;
    trace.name = cycle.name();
    trace.rows.reserve(speeds.size());

    int gear = 1;
    for (std::size_t i = 0; i < speeds.size(); ++i) {
        TraceRow row;
        row.t = grid.samples()[i].t;
        row.v = speeds[i];
        row.a = accels[i];
        row.grade = options.grade ? options.grade(row.t) : 0.0;

        // Shift decision first, using the demand seen in the current gear.
        const double demand = wheel_force(p, row.v, row.a, row.grade, gear);
        gear = select_gear(vehicle_.shift, n_gears, gear, row.v, pedal(demand, row.v));
        row.gear = gear;

        const double force = wheel_force(p, row.v, row.a, row.grade, gear);
        row.pedal = pedal(force, row.v);

        const double ratio = p.gear_ratio(gear) * p.d_r;
        const double n_raw = transmission_output_speed(p, row.v) * p.gear_ratio(gear);
        if (n_raw > p.N_max) {
            row.flag = true;
        }
        row.engine_speed = std::clamp(n_raw, p.N_min, p.N_max);

        const double t_max = vehicle_.shift.torque_max(row.engine_speed);
        if (row.v < kStandstillSpeed) {
            row.engine_torque = ref.idle_torque;
            row.fuel = ref.idle_fuel;
        } else {
            double demanded = force * p.r_tire / (ratio * ref.eta);
            if (gear == 1 && !options.lock_torque_converter) {
                demanded += ref.torque_correction(row.a);
            }
            if (demanded > t_max) {
                row.flag = true;
            }
            row.engine_torque = std::clamp(demanded, ref.idle_torque, std::max(t_max, ref.idle_torque));
            const bool fuel_cut = row.v > ref.fuel_cut_speed && force < ref.fuel_cut_force;
            row.fuel = fuel_cut ? 0.0 : vehicle_.fuel_map(row.engine_speed, row.engine_torque);
        }
        trace.rows.push_back(row);
    }
    return trace;
}

Trace simulate(const DriveCycle& cycle, const Vehicle& vehicle, const SimulationOptions& options) {
    return ReferencePowertrain(vehicle).simulate(cycle, options);
}

}  // namespace fuelred
