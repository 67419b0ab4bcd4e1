#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fuelred {

struct TraceRow {
    double t = 0.0;       // s
    double v = 0.0;       // m/s
    double a = 0.0;       // m/s^2
    double grade = 0.0;   // rad
    int gear = 1;
    double engine_speed = 0.0;   // rad/s
    double engine_torque = 0.0;  // Nm
    double pedal = 0.0;          // percent
    double fuel = 0.0;           // g/s
    bool flag = false;           // envelope exceeded or input clamped

    friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

/// Per-timestep record shared by the simulator, the models and dyno logs.
/// Models that do not resolve internal dynamics (gear, engine speed and
/// torque, pedal) set has_dynamics = false; those columns are then ignored.
struct Trace {
    std::string name;
    std::vector<TraceRow> rows;
    bool has_dynamics = true;

    [[nodiscard]] std::size_t size() const noexcept { return rows.size(); }
    [[nodiscard]] bool empty() const noexcept { return rows.empty(); }

    [[nodiscard]] std::vector<double> times() const;
    [[nodiscard]] std::vector<double> fuel() const;

    friend bool operator==(const Trace&, const Trace&) = default;
};

/// Optional first line written as a `#` comment (provenance).
void write_trace_csv(const std::filesystem::path& path, const Trace& trace,
                     const std::string& comment = {});
Trace read_trace_csv(const std::filesystem::path& path);

}  // namespace fuelred

namespace fuelred {

class DriveCycle;

/// Model input row: time, speed and acceleration.
struct KinematicRow {
    double t = 0.0;  // s
    double v = 0.0;  // m/s
    double a = 0.0;  // m/s^2

    friend bool operator==(const KinematicRow&, const KinematicRow&) = default;
};

/// Resamples the cycle onto the dt grid and derives acceleration with the
/// same finite differences the reference simulator uses.
std::vector<KinematicRow> kinematics_from_cycle(const DriveCycle& cycle, double dt);
std::vector<KinematicRow> kinematics_from_trace(const Trace& trace);

}  // namespace fuelred
