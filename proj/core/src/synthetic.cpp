#include "fuelred/synthetic.hpp"

#include "fuelred/interp.hpp"
#include "fuelred/reference_powertrain.hpp"
#include "fuelred/units.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace fuelred::synthetic {

namespace {

// Engine speed at which the gearbox upshifts, over pedal position, rising
// towards kick-down.
constexpr std::array<double, 5> kShiftPedal{0.0, 25.0, 50.0, 75.0, 100.0};
constexpr std::array<double, 5> kShiftRpm{1600.0, 1700.0, 2100.0, 2800.0, 3800.0};
constexpr double kDownshiftFraction = 0.85;

// Gear k is left for k+1 once the engine-speed schedule is reached and
// gear k+1 still delivers the pedal's share of the maximum wheel torque,
// or just before gear k over-revs.
double upshift_speed(const VehicleParams& p, const WheelTorqueCurves& wheel, double pedal, int gear) {
    const double per_radps = p.r_tire / (p.d_r * p.gear_ratio(gear));
    const double v_over = 0.98 * p.N_max * per_radps;
    const double share = pedal / 100.0;
    const auto& next = wheel.by_gear[static_cast<std::size_t>(gear)];
    double v = units::rpm_to_radps(interp_linear(kShiftPedal, kShiftRpm, pedal)) * per_radps;
    while (v < v_over && next(v) < share * wheel.overall(v)) {
        v += 0.05;
    }
    return std::min(v, v_over);
}

// Piecewise-linear speed trace assembled from driving primitives and
// sampled at 1 Hz.
class CycleBuilder {
public:
    CycleBuilder& idle(double seconds) {
        return hold(seconds, 0.0, 1.0);
    }

    CycleBuilder& ramp(double v_target, double accel) {
        const double dv = v_target - v_;
        const double duration = std::abs(dv) / accel;
        const auto steps = static_cast<int>(std::ceil(duration));
        for (int i = 1; i <= steps; ++i) {
            const double t = std::min(static_cast<double>(i), duration);
            knot(t_ + t, v_ + dv * t / duration);
        }
        t_ += duration;
        v_ = v_target;
        return *this;
    }

    // Cruise around the current speed with a sinusoidal wobble.
    CycleBuilder& cruise(double seconds, double amplitude, double period) {
        return hold(seconds, amplitude, period);
    }

    DriveCycle build(const std::string& name) const {
        const auto end = static_cast<int>(std::floor(t_));
        std::vector<CycleSample> samples;
        for (int s = 0; s <= end; ++s) {
            const double v = interp_linear(ts_, vs_, s);
            samples.push_back({static_cast<double>(s), std::round(std::max(v, 0.0) * 1000.0) / 1000.0});
        }
        return DriveCycle(name, std::move(samples));
    }

private:
    CycleBuilder& hold(double seconds, double amplitude, double period) {
        const auto steps = static_cast<int>(std::ceil(seconds));
        for (int i = 1; i <= steps; ++i) {
            const double t = std::min(static_cast<double>(i), seconds);
            knot(t_ + t, v_ + amplitude * std::sin(2.0 * std::numbers::pi * t / period));
        }
        t_ += seconds;
        return *this;
    }

    void knot(double t, double v) {
        if (t > ts_.back() + 1e-9) {
            ts_.push_back(t);
            vs_.push_back(v);
        }
    }

    double t_ = 0.0;
    double v_ = 0.0;
    std::vector<double> ts_{0.0};
    std::vector<double> vs_{0.0};
};

}  // namespace


Vehicle default_vehicle() {
    Vehicle v;
    auto& p = v.params;
    p.m_vehicle = 1700.0;
    p.r_tire = 0.36;
    p.d_r = 3.5;
    p.g_r = {4.2, 2.6, 1.7, 1.25, 1.0, 0.8};
    for (const double g : p.g_r) {
        const double overall = g * p.d_r / p.r_tire;
        p.m_general.push_back(p.m_vehicle * 1.04 + 0.15 * overall * overall);
    }
    p.R_g = 150.0;
    p.R_r = 2.0;
    p.R_a = 0.42;
    p.N_min = units::rpm_to_radps(700.0);
    p.N_max = units::rpm_to_radps(6000.0);

    std::vector<double> n_grid;
    for (double rpm = 700.0; rpm <= 6000.0 + 1e-9; rpm += 250.0) {
        n_grid.push_back(units::rpm_to_radps(rpm));
    }
    std::vector<double> t_grid;
    for (double t = 0.0; t <= 260.0 + 1e-9; t += 10.0) {
        t_grid.push_back(t);
    }
    v.fuel_map = EngineFuelMap::from_willans({2.78, 25.0, 4600.0, 42600.0}, std::move(n_grid), std::move(t_grid));

    auto& s = v.shift;
    std::vector<double> tn;
    for (const double rpm : {700.0, 1500.0, 3000.0, 4500.0, 6000.0}) {
        tn.push_back(units::rpm_to_radps(rpm));
    }
    s.torque_max = Curve1D(std::move(tn), {180.0, 220.0, 245.0, 240.0, 210.0});
    const auto wheel = derive_wheel_torque_curves(p, s.torque_max, v.reference.eta);
    s.pedal_grid.assign(kShiftPedal.begin(), kShiftPedal.end());
    for (const double pedal : s.pedal_grid) {
        std::vector<double> up;
        std::vector<double> down;
        for (int k = 1; k < p.n_gears(); ++k) {
            up.push_back(upshift_speed(p, wheel, pedal, k));
            down.push_back(kDownshiftFraction * up.back());
        }
        s.upshift.push_back(std::move(up));
        s.downshift.push_back(std::move(down));
    }

    v.reference.torque_correction = Curve1D({0.0}, {5.0});
    v.validate();
    return v;
}

DriveCycle hwfet_like() {
    CycleBuilder b;
    b.idle(12)
        .ramp(12.0, 1.4)
        .ramp(21.0, 0.9)
        .cruise(110, 1.2, 37)
        .ramp(26.0, 0.5)
        .cruise(180, 1.0, 53)
        .ramp(18.0, 0.7)
        .cruise(70, 0.8, 29)
        .ramp(24.5, 0.6)
        .cruise(150, 1.3, 41)
        .ramp(15.0, 0.9)
        .cruise(40, 0.6, 23)
        .ramp(0.0, 1.3)
        .idle(12);
    return b.build("hwfet_like");
}

DriveCycle us06_like() {
    CycleBuilder b;
    b.idle(12)
        .ramp(14.0, 3.2)
        .ramp(27.0, 2.0)
        .cruise(25, 1.5, 17)
        .ramp(0.0, 3.0)
        .idle(8)
        .ramp(20.0, 3.0)
        .ramp(33.0, 1.2)
        .cruise(90, 2.0, 23)
        .ramp(22.0, 2.4)
        .cruise(20, 1.0, 13)
        .ramp(31.0, 1.8)
        .cruise(120, 1.8, 31)
        .ramp(18.0, 2.6)
        .ramp(27.0, 2.2)
        .cruise(40, 1.2, 19)
        .ramp(0.0, 3.0)
        .idle(10)
        .ramp(12.0, 3.1)
        .cruise(8, 0.5, 8)
        .ramp(0.0, 2.8)
        .idle(6)
        .ramp(15.0, 2.9)
        .cruise(10, 0.6, 10)
        .ramp(0.0, 3.0)
        .idle(12);
    return b.build("us06_like");
}

DriveCycle wltc_like() {
    CycleBuilder b;
    b.idle(12);
    // Low-speed phase: short urban trips.
    for (const auto& [v, hold] : {std::pair{8.0, 15.0}, {12.0, 25.0}, {6.0, 10.0}, {14.0, 35.0}, {10.0, 20.0}}) {
        b.ramp(v, 1.0).cruise(hold, 0.7, 11).ramp(0.0, 1.1).idle(14);
    }
    // Medium phase.
    b.ramp(15.0, 1.2).ramp(21.0, 0.7).cruise(60, 1.5, 27).ramp(12.0, 0.8).cruise(30, 1.0, 15).ramp(0.0, 1.2).idle(15);
    b.ramp(18.0, 1.1).cruise(80, 1.4, 33).ramp(8.0, 0.9).ramp(16.0, 0.8).cruise(40, 1.0, 19).ramp(0.0, 1.0).idle(12);
    // High phase.
    b.ramp(14.0, 1.3).ramp(26.0, 0.6).cruise(100, 1.8, 41).ramp(17.0, 0.7).cruise(35, 1.0, 17).ramp(27.0, 0.5)
        .cruise(80, 1.5, 29).ramp(0.0, 1.2).idle(12);
    // Extra-high phase.
    b.ramp(16.0, 1.5).ramp(28.0, 0.8).ramp(34.0, 0.4).cruise(120, 1.2, 47).ramp(24.0, 0.6).cruise(40, 0.8, 23)
        .ramp(33.0, 0.5).cruise(60, 1.0, 31).ramp(0.0, 1.4).idle(12);
    return b.build("wltc_like");
}

std::vector<DriveCycle> evaluation_cycles() { return {hwfet_like(), us06_like(), wltc_like()}; }

DynoLog make_dyno_log(const Vehicle& vehicle, const DriveCycle& cycle, const DynoLogOptions& options) {
    SimulationOptions sim;
    sim.dt = options.dt;
    const auto trace = simulate(cycle, vehicle, sim);

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> noise(0.0, options.rpm_noise);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    DynoLog log;
    log.name = cycle.name();
    log.rows.reserve(trace.rows.size());
    const std::size_t n = trace.rows.size();
    // Dropouts are kept away from the ends of the log so the fixed
    // smoothing endpoints stay representative.
    const std::size_t margin = static_cast<std::size_t>(std::ceil(5.0 / options.dt));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = trace.rows[i];
        const double v_kph = units::mps_to_kph(r.v);
        DynoRow row;
        row.t = r.t;
        row.v_kph = std::round(v_kph);
        row.engine_rpm = units::radps_to_rpm(r.engine_speed);
        row.engine_torque_nm = r.engine_torque;
        row.pedal_pct = r.pedal;
        row.fuel_gps = r.fuel;
        row.water_temp_c = std::min(options.hot_temp, options.cold_temp + options.warmup_rate * r.t);
        row.gear = r.gear;
        row.trans_out_rpm = v_kph / options.slope + noise(rng);
        const bool dropout = unit(rng) < options.dropout_rate;
        if (dropout && r.v > 1.0 && i > margin && i + margin < n) {
            row.trans_out_rpm = 0.0;
        }
        log.rows.push_back(row);
    }
    return log;
}

}  // namespace fuelred::synthetic
