#pragma once

#include <numbers>

namespace fuelred::units {

inline constexpr double kGravity = 9.81;  // m/s^2

inline constexpr double kMpsPerKph = 1.0 / 3.6;
inline constexpr double kMpsPerMph = 0.44704;
inline constexpr double kRadpsPerRpm = 2.0 * std::numbers::pi / 60.0;

constexpr double kph_to_mps(double kph) { return kph * kMpsPerKph; }
constexpr double mps_to_kph(double mps) { return mps / kMpsPerKph; }
constexpr double mph_to_mps(double mph) { return mph * kMpsPerMph; }
constexpr double rpm_to_radps(double rpm) { return rpm * kRadpsPerRpm; }
constexpr double radps_to_rpm(double radps) { return radps / kRadpsPerRpm; }

}  // namespace fuelred::units
