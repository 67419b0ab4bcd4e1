#pragma once

#include "fuelred/drive_cycle.hpp"
#include "fuelred/dyno_ingest.hpp"
#include "fuelred/vehicle.hpp"

#include <cstdint>
#include <vector>

namespace fuelred::synthetic {

/// Mid-size SUV with a six-speed automatic and a Willans-line engine map.
/// Upshifts follow an engine-speed schedule (1600 rpm at zero pedal,
/// rising to 3800 rpm at full pedal) but wait until the next gear can
/// deliver the pedal's share of the maximum wheel torque; downshifts
/// happen at 85 % of the upshift speed into the gear. The first-gear
/// torque-converter correction is a constant +5 Nm.
Vehicle default_vehicle();

// Deterministic 1 Hz cycles. Each starts and ends with a standstill.
DriveCycle hwfet_like();  // highway cruising
DriveCycle us06_like();   // aggressive, up to ~3.2 m/s^2
DriveCycle wltc_like();   // mixed urban to motorway

std::vector<DriveCycle> evaluation_cycles();

struct DynoLogOptions {
    std::uint64_t seed = 2024;
    double slope = 0.0398;         // (km/h)/rpm
    double rpm_noise = 20.0;       // standard deviation on output speed, rpm
    double dropout_rate = 0.003;   // probability that an output-speed sample reads 0
    double warmup_rate = 0.225;    // water temperature rise, C/s
    double cold_temp = 40.0;       // C
    double hot_temp = 90.0;        // C
    double dt = 0.1;               // logging period, s
};

/// 10 Hz dyno log of the reference powertrain driving a cycle, with the
/// logger artefacts the ingestion pipeline has to remove: 1 km/h speed
/// resolution, noisy transmission output speed with occasional dropouts,
/// and a cold start.
DynoLog make_dyno_log(const Vehicle& vehicle, const DriveCycle& cycle, const DynoLogOptions& options = {});

}  // namespace fuelred::synthetic
