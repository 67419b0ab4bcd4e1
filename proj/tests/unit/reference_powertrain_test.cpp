#include "fuelred/errors.hpp"
#include "fuelred/reference_powertrain.hpp"
#include "fuelred/synthetic.hpp"
#include "fuelred/validation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

using namespace fuelred;

namespace {

VehicleParams simple_params() {
    VehicleParams p;
    p.m_vehicle = 1500;
    p.m_general = {1600, 1550};
    p.r_tire = 0.35;
    p.d_r = 3.0;
    p.g_r = {2.0, 1.0};
    p.R_a = 0.4;
    p.R_r = 1.0;
    p.R_g = 100;
    p.N_max = 600;
    p.N_min = 80;
    return p;
}

DriveCycle constant_speed(double v, double duration) {
    return DriveCycle("const", {{0.0, v}, {duration, v}});
}

}  // namespace

TEST(RoadLoad, ConstantTermAtStandstill) {
    EXPECT_DOUBLE_EQ(road_load(simple_params(), 0.0), 100.0);
}

TEST(RoadLoad, DirectEvaluation) {
    EXPECT_DOUBLE_EQ(road_load(simple_params(), 10.0), 150.0);
}

TEST(RoadLoad, MonotoneAndNegativeSpeedClamped) {
    const auto p = simple_params();
    double prev = road_load(p, 0.0);
    for (double v = 0.5; v < 50; v += 0.5) {
        EXPECT_GT(road_load(p, v), prev);
        prev = road_load(p, v);
    }
    EXPECT_DOUBLE_EQ(road_load(p, -3.0), road_load(p, 0.0));
}

TEST(WheelForce, StaticsEqualsRoadLoad) {
    const auto p = simple_params();
    EXPECT_DOUBLE_EQ(wheel_force(p, 13.0, 0.0, 0.0, 2), road_load(p, 13.0));
}

TEST(WheelForce, InertiaUsesGeneralMassOfGear) {
    EXPECT_DOUBLE_EQ(wheel_force(simple_params(), 0.0, 1.0, 0.0, 1), 1600.0 + 100.0);
}

TEST(WheelForce, GradeTermAntisymmetric) {
    const auto p = simple_params();
    const double th = 0.07;
    EXPECT_NEAR(wheel_force(p, 8, 0.3, th, 1) - wheel_force(p, 8, 0.3, -th, 1), 2 * 1500 * 9.81 * std::sin(th),
                1e-9);
}

TEST(WheelForce, GearOutOfRange) {
    EXPECT_THROW((void)wheel_force(simple_params(), 1, 0, 0, 3), GearOutOfRange);
    EXPECT_THROW((void)wheel_force(simple_params(), 1, 0, 0, 0), GearOutOfRange);
}

TEST(OutputSpeed, DirectEvaluationAndLinearity) {
    const auto p = simple_params();
    EXPECT_DOUBLE_EQ(transmission_output_speed(p, 0.0), 0.0);
    EXPECT_NEAR(transmission_output_speed(p, 10.0), 85.714, 1e-3);
    EXPECT_DOUBLE_EQ(transmission_output_speed(p, 14.0), 2.0 * transmission_output_speed(p, 7.0));
}

TEST(SelectGear, HysteresisBandHolds) {
    const auto v = synthetic::default_vehicle();
    const auto& m = v.shift;
    const int n = v.params.n_gears();
    const double pedal = 30.0;
    const double mid = 0.5 * (m.v_downshift(pedal, 3) + m.v_upshift(pedal, 3));
    EXPECT_EQ(select_gear(m, n, 3, mid, pedal), 3);
}

TEST(SelectGear, StrictThresholds) {
    const auto v = synthetic::default_vehicle();
    const auto& m = v.shift;
    const int n = v.params.n_gears();
    const double up = m.v_upshift(20.0, 2);
    EXPECT_EQ(select_gear(m, n, 2, up, 20.0), 2);
    EXPECT_EQ(select_gear(m, n, 2, std::nextafter(up, 1e9), 20.0), 3);
    const double down = m.v_downshift(20.0, 2);
    EXPECT_EQ(select_gear(m, n, 2, down, 20.0), 2);
    EXPECT_EQ(select_gear(m, n, 2, std::nextafter(down, 0.0), 20.0), 1);
}

TEST(SelectGear, TopGearSaturates) {
    const auto v = synthetic::default_vehicle();
    const int n = v.params.n_gears();
    EXPECT_EQ(select_gear(v.shift, n, n, 1e6, 50.0), n);
}

TEST(Simulate, StandstillIdles) {
    const auto v = synthetic::default_vehicle();
    const auto trace = simulate(constant_speed(0.0, 30.0), v);
    for (const auto& r : trace.rows) {
        EXPECT_EQ(r.gear, 1);
        EXPECT_EQ(r.fuel, v.reference.idle_fuel);
        EXPECT_EQ(r.engine_speed, v.params.N_min);
    }
}

TEST(Simulate, SteadyCruisePowerBalance) {
    const auto v = synthetic::default_vehicle();
    const auto& p = v.params;
    const double speed = 20.0;
    const auto trace = simulate(constant_speed(speed, 60.0), v);
    // Road-load power computed from the coefficients by hand.
    const double load_power = (p.R_g + p.R_r * speed + p.R_a * speed * speed) * speed;
    const auto& last = trace.rows.back();
    ASSERT_FALSE(last.flag);
    const double engine_power = last.engine_torque * last.engine_speed * v.reference.eta;
    EXPECT_LT(std::abs(engine_power - load_power) / load_power, 0.01);
}

TEST(Simulate, SteadyStatePowerBalanceAcrossCycles) {
    const auto v = synthetic::default_vehicle();
    const auto& p = v.params;
    for (const auto& cycle : synthetic::evaluation_cycles()) {
        const auto trace = simulate(cycle, v);
        const auto& rows = trace.rows;
        for (std::size_t i = 10; i + 10 < rows.size(); ++i) {
            const auto& r = rows[i];
            bool steady = std::abs(r.a) < 1e-3 && r.v > 5.0 && !r.flag;
            for (std::size_t k = i - 10; k <= i + 10 && steady; ++k) {
                steady = rows[k].gear == r.gear;
            }
            const double n_unclamped = r.v * p.d_r / p.r_tire * p.g_r[r.gear - 1];
            if (!steady || r.engine_speed != n_unclamped || r.engine_torque <= v.reference.idle_torque) {
                continue;
            }
            const double load_power = (p.R_g + p.R_r * r.v + p.R_a * r.v * r.v) * r.v;
            const double engine_power = r.engine_torque * r.engine_speed * v.reference.eta;
            EXPECT_LT(std::abs(engine_power - load_power) / load_power, 0.01) << cycle.name() << " t=" << r.t;
        }
    }
}

TEST(Simulate, TraceInvariants) {
    const auto v = synthetic::default_vehicle();
    for (const auto& cycle : synthetic::evaluation_cycles()) {
        const auto trace = simulate(cycle, v);
        const auto cum = cumulative_fuel(trace);
        for (std::size_t i = 0; i < trace.size(); ++i) {
            const auto& r = trace.rows[i];
            EXPECT_GE(r.fuel, 0.0);
            EXPECT_GE(r.gear, 1);
            EXPECT_LE(r.gear, v.params.n_gears());
            EXPECT_GE(r.engine_speed, 0.0);
            EXPECT_LE(r.engine_speed, v.params.N_max);
            if (i > 0) {
                EXPECT_GT(r.t, trace.rows[i - 1].t);
                EXPECT_LE(std::abs(r.gear - trace.rows[i - 1].gear), 1);
                EXPECT_GE(cum.running[i], cum.running[i - 1]);
            }
            if (r.v < 0.1) {
                EXPECT_EQ(r.fuel, v.reference.idle_fuel);
            }
            if (r.v > v.reference.fuel_cut_speed &&
                wheel_force(v.params, r.v, r.a, r.grade, r.gear) < v.reference.fuel_cut_force) {
                EXPECT_EQ(r.fuel, 0.0);
            }
        }
    }
}

TEST(Simulate, Deterministic) {
    const auto v = synthetic::default_vehicle();
    const auto cycle = synthetic::us06_like();
    EXPECT_EQ(simulate(cycle, v), simulate(cycle, v));
}

TEST(Simulate, GradeRaisesFuelOnClimb) {
    const auto v = synthetic::default_vehicle();
    const auto cycle = constant_speed(15.0, 30.0);
    SimulationOptions climb;
    climb.grade = [](double) { return 0.03; };
    const auto flat = simulate(cycle, v);
    const auto hill = simulate(cycle, v, climb);
    EXPECT_GT(hill.rows.back().fuel, flat.rows.back().fuel);
    EXPECT_DOUBLE_EQ(hill.rows.back().grade, 0.03);
}

TEST(Vehicle, JsonRoundTrip) {
    const auto v = synthetic::default_vehicle();
    const nlohmann::json j = v;
    EXPECT_EQ(j.get<Vehicle>(), v);
}

TEST(Vehicle, ValidationRejectsBadRatios) {
    auto p = simple_params();
    p.g_r = {1.0, 2.0};
    EXPECT_THROW(p.validate(), ConfigError);
}
