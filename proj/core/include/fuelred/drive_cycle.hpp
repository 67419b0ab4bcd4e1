#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fuelred {

enum class SpeedUnit { mps, kph, mph };

/// Parses "mps", "kph" or "mph"; throws UnitError otherwise.
SpeedUnit parse_speed_unit(std::string_view tag);
std::string_view to_string(SpeedUnit unit) noexcept;
double to_mps(double value, SpeedUnit unit) noexcept;

inline constexpr double kDefaultDt = 0.1;  // s

struct CycleSample {
    double t = 0.0;  // s
    double v = 0.0;  // m/s

    friend bool operator==(const CycleSample&, const CycleSample&) = default;
};

/// Timestamped target-speed schedule in SI units. The constructor enforces
/// the invariants: at least two samples, t starts at 0 and strictly increases,
/// v is finite and non-negative.
class DriveCycle {
public:
    DriveCycle(std::string name, std::vector<CycleSample> samples);

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] const std::vector<CycleSample>& samples() const noexcept { return samples_; }
    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] double duration() const noexcept { return samples_.back().t; }

    // Piecewise-linear speed at time t, end values held outside the range.
    [[nodiscard]] double speed_at(double t) const noexcept;

    [[nodiscard]] std::vector<double> times() const;
    [[nodiscard]] std::vector<double> speeds() const;

    friend bool operator==(const DriveCycle&, const DriveCycle&) = default;

private:
    std::string name_;
    std::vector<CycleSample> samples_;
};

/// Loads a `t,v` CSV and converts speeds to m/s. The cycle name defaults to
/// the file stem.
DriveCycle load_cycle(const std::filesystem::path& path, SpeedUnit unit);
DriveCycle parse_cycle(std::string_view csv_text, SpeedUnit unit, std::string name);

void write_cycle(const std::filesystem::path& path, const DriveCycle& cycle, SpeedUnit unit);

/// Linear interpolation onto 0, dt, 2dt, ... <= t_end. Grid times are k*dt.
DriveCycle resample(const DriveCycle& cycle, double dt);

}  // namespace fuelred
