#include "fuelred/map_extraction.hpp"

#include "fuelred/errors.hpp"
#include "fuelred/reference_powertrain.hpp"
#include "fuelred/semi_principled.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace fuelred {

namespace {

constexpr double kIdleTorqueRate = 0.01;  // Nm/s
constexpr double kIdleWindow = 1.0;       // s

}  // namespace

int DownshiftMap::highest_gear(double v) const noexcept {
    int gear = 1;
    for (std::size_t k = 1; k < cutoffs.size(); ++k) {
        if (v >= cutoffs[k]) {
            gear = static_cast<int>(k) + 1;
        }
    }
    return gear;
}

std::vector<ShiftEvent> detect_shift_events(const Trace& trace) {
    std::vector<ShiftEvent> events;
    for (std::size_t i = 1; i < trace.rows.size(); ++i) {
        const auto& prev = trace.rows[i - 1];
        const auto& cur = trace.rows[i];
        if (cur.gear != prev.gear) {
            events.push_back({trace.name, cur.t, prev.gear, cur.gear, cur.v, prev.v, cur.pedal});
        }
    }
    return events;
}

VcdDataset run_vcd(const Vehicle& vehicle, std::span<const DriveCycle> cycles, const VcdOptions& options) {
    if (cycles.empty()) {
        throw ConfigError("run_vcd needs at least one drive cycle");
    }
    const ReferencePowertrain reference(vehicle);
    SimulationOptions sim;
    sim.dt = options.dt;
    sim.lock_torque_converter = options.lock_torque_converter;

    VcdDataset ds;
    ds.params = vehicle.params;
    for (const auto& cycle : cycles) {
        ds.traces.push_back(reference.simulate(cycle, sim));
        const auto events = detect_shift_events(ds.traces.back());
        ds.events.insert(ds.events.end(), events.begin(), events.end());
    }
    return ds;
}

IdleConstants extract_idle_constants(const VcdDataset& ds) {
    double torque_sum = 0.0;
    double fuel_sum = 0.0;
    std::size_t count = 0;
    for (const auto& trace : ds.traces) {
        const auto& rows = trace.rows;
        const std::size_t n = rows.size();
        if (n < 3) {
            continue;
        }
        // Per-row torque rate and "quiet" status (standstill, flat torque).
        std::vector<char> quiet(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t lo = i == 0 ? 0 : i - 1;
            const std::size_t hi = i + 1 == n ? i : i + 1;
            const double rate = (rows[hi].engine_torque - rows[lo].engine_torque) / (rows[hi].t - rows[lo].t);
            quiet[i] = rows[i].v < kStandstillSpeed && std::abs(rate) < kIdleTorqueRate;
        }
        std::size_t lo = 0;
        std::size_t hi = 0;  // window [lo, hi) covers rows within +-1 s of i
        std::size_t quiet_in_window = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = rows[i].t;
            while (hi < n && rows[hi].t <= t + kIdleWindow + 1e-9) {
                quiet_in_window += static_cast<std::size_t>(quiet[hi]);
                ++hi;
            }
            while (rows[lo].t < t - kIdleWindow - 1e-9) {
                quiet_in_window -= static_cast<std::size_t>(quiet[lo]);
                ++lo;
            }
            // The whole +-1 s interval must lie inside the trace.
            if (t - kIdleWindow < rows.front().t - 1e-9 || t + kIdleWindow > rows.back().t + 1e-9) {
                continue;
            }
            if (quiet_in_window == hi - lo) {
                torque_sum += rows[i].engine_torque;
                fuel_sum += rows[i].fuel;
                ++count;
            }
        }
    }
    if (count == 0) {
        throw NoIdleData("no standstill interval with steady torque found");
    }
    return {torque_sum / static_cast<double>(count), fuel_sum / static_cast<double>(count)};
}

FuelCutThresholds extract_fuel_cut_thresholds(const VcdDataset& ds) {
    std::vector<double> speeds;
    std::vector<double> forces;
    for (const auto& trace : ds.traces) {
        for (const auto& r : trace.rows) {
            if (r.fuel == 0.0 && r.v > kStandstillSpeed) {
                speeds.push_back(r.v);
                forces.push_back(wheel_force(ds.params, r.v, r.a, r.grade, r.gear));
            }
        }
    }
    if (speeds.empty()) {
        throw NoFuelCutData("no moving zero-fuel steps in the dataset");
    }
    return {percentile(speeds, 1.0), percentile(forces, 95.0)};
}

DownshiftMap extract_downshift_map(const VcdDataset& ds) {
    const int n = ds.params.n_gears();
    std::map<int, std::vector<double>> speeds_by_gear;
    for (const auto& e : ds.events) {
        if (e.to_gear == e.from_gear - 1 && e.from_gear >= 2 && e.from_gear <= n) {
            speeds_by_gear[e.from_gear].push_back(e.v_prev);
        }
    }
    if (speeds_by_gear.empty()) {
        throw NoDownshiftData("dataset contains no downshift events");
    }

    // Work in equivalent engine speed (cutoff speed in gear k), which is
    // roughly gear-independent and keeps filled-in cutoffs monotone.
    const auto to_engine = [&](int gear, double v) {
        return transmission_output_speed(ds.params, v) * ds.params.gear_ratio(gear);
    };
    const auto to_vehicle = [&](int gear, double n_eng) {
        return n_eng * ds.params.r_tire / (ds.params.d_r * ds.params.gear_ratio(gear));
    };

    DownshiftMap map;
    map.cutoffs.assign(static_cast<std::size_t>(n), 0.0);
    map.interpolated.assign(static_cast<std::size_t>(n), false);
    std::vector<int> known;
    std::vector<double> known_engine;
    for (const auto& [gear, speeds] : speeds_by_gear) {
        const double v = median(speeds);
        map.cutoffs[static_cast<std::size_t>(gear - 1)] = v;
        known.push_back(gear);
        known_engine.push_back(to_engine(gear, v));
    }
    for (int gear = 2; gear <= n; ++gear) {
        if (speeds_by_gear.count(gear) != 0) {
            continue;
        }
        std::vector<double> xs(known.begin(), known.end());
        const double n_eng = interp_linear(xs, known_engine, static_cast<double>(gear));
        map.cutoffs[static_cast<std::size_t>(gear - 1)] = to_vehicle(gear, n_eng);
        map.interpolated[static_cast<std::size_t>(gear - 1)] = true;
    }
    return map;
}

Curve1D extract_torque_correction(const VcdDataset& ds, const SemiPrincipledModel& draft,
                                  const TorqueCorrectionOptions& options) {
    if (options.bins < 1 || !(options.a_max > options.a_min)) {
        throw ConfigError("torque correction needs >= 1 bin over a non-empty range");
    }
    const auto& principled = draft.principled();
    const double t_floor = draft.constants().T_min;
    const double width = (options.a_max - options.a_min) / options.bins;

    std::vector<double> sums(static_cast<std::size_t>(options.bins), 0.0);
    std::vector<std::size_t> counts(static_cast<std::size_t>(options.bins), 0);
    std::size_t first_gear_rows = 0;
    for (const auto& trace : ds.traces) {
        for (const auto& r : trace.rows) {
            if (r.gear != 1 || r.v < kStandstillSpeed) {
                continue;
            }
            ++first_gear_rows;
            const double t_max = principled.torque_max(r.engine_speed);
            // Rows pinned at a torque clamp carry no information on the offset.
            if (r.flag || r.engine_torque <= t_floor + 1e-9 || r.engine_torque >= t_max - 1e-9) {
                continue;
            }
            const double force = wheel_force(ds.params, r.v, r.a, r.grade, 1);
            const double predicted = draft.map_torque(1, transmission_output_speed(ds.params, r.v), force);
            const int bin = std::clamp(static_cast<int>(std::floor((r.a - options.a_min) / width)), 0,
                                       options.bins - 1);
            sums[static_cast<std::size_t>(bin)] += r.engine_torque - predicted;
            ++counts[static_cast<std::size_t>(bin)];
        }
    }
    if (first_gear_rows == 0) {
        throw NoFirstGearData("dataset has no moving first-gear steps");
    }
    std::vector<double> centres;
    std::vector<double> values;
    for (int b = 0; b < options.bins; ++b) {
        const auto i = static_cast<std::size_t>(b);
        if (counts[i] == 0) {
            continue;
        }
        centres.push_back(options.a_min + (b + 0.5) * width);
        values.push_back(sums[i] / static_cast<double>(counts[i]));
    }
    if (centres.empty()) {
        throw NoFirstGearData("all first-gear steps sit at a torque clamp");
    }
    return Curve1D(std::move(centres), std::move(values));
}

FittedMaps fit_all_maps(const VcdDataset& ds, const MapFitOptions& options) {
    const int n_gears = ds.params.n_gears();
    const PolyFitOptions poly{options.max_total_degree};

    double torque_floor = options.torque_floor;
    if (std::isnan(torque_floor)) {
        torque_floor = std::numeric_limits<double>::infinity();
        for (const auto& trace : ds.traces) {
            for (const auto& r : trace.rows) {
                torque_floor = std::min(torque_floor, r.engine_torque);
            }
        }
    }

    std::vector<double> fn, ft, ff;
    struct GearSamples {
        std::vector<double> n_out, force, n_eng, n_out_t, force_t, torque;
    };
    std::vector<GearSamples> gears(static_cast<std::size_t>(n_gears));

    for (const auto& trace : ds.traces) {
        for (const auto& r : trace.rows) {
            if (r.v < kStandstillSpeed) {
                continue;
            }
            if (r.fuel > 0.0) {
                fn.push_back(r.engine_speed);
                ft.push_back(r.engine_torque);
                ff.push_back(r.fuel);
            }
            if (r.gear < 1 || r.gear > n_gears) {
                continue;
            }
            auto& g = gears[static_cast<std::size_t>(r.gear - 1)];
            const double n_out = transmission_output_speed(ds.params, r.v);
            const double force = wheel_force(ds.params, r.v, r.a, r.grade, r.gear);
            const double n_raw = n_out * ds.params.gear_ratio(r.gear);
            if (n_raw > ds.params.N_min && n_raw < ds.params.N_max) {
                g.n_out.push_back(n_out);
                g.force.push_back(force);
                g.n_eng.push_back(r.engine_speed);
            }
            if (!r.flag && r.engine_torque > torque_floor + 1e-9) {
                g.n_out_t.push_back(n_out);
                g.force_t.push_back(force);
                g.torque.push_back(r.engine_torque);
            }
        }
    }

    FittedMaps maps;
    if (ff.size() < options.min_samples) {
        throw InsufficientData("fuel map needs " + std::to_string(options.min_samples) + " fuelled steps, got " +
                               std::to_string(ff.size()));
    }
    maps.fuel = fit_poly2d(fn, ft, ff, options.fuel_degree, poly);
    for (int k = 1; k <= n_gears; ++k) {
        const auto& g = gears[static_cast<std::size_t>(k - 1)];
        const std::size_t usable = std::min(g.n_eng.size(), g.torque.size());
        if (usable < options.min_samples) {
            throw InsufficientGearData(k, usable, options.min_samples);
        }
        maps.engine_speed.push_back(fit_poly2d(g.n_out, g.force, g.n_eng, options.speed_degree, poly));
        maps.engine_torque.push_back(fit_poly2d(g.n_out_t, g.force_t, g.torque, options.torque_degree, poly));
    }
    return maps;
}

void to_json(nlohmann::json& j, const ShiftEvent& e) {
    j = nlohmann::json{{"cycle", e.cycle}, {"t", e.t},           {"from_gear", e.from_gear}, {"to_gear", e.to_gear},
                       {"v", e.v},         {"v_prev", e.v_prev}, {"pedal", e.pedal}};
}

void from_json(const nlohmann::json& j, ShiftEvent& e) {
    j.at("cycle").get_to(e.cycle);
    j.at("t").get_to(e.t);
    j.at("from_gear").get_to(e.from_gear);
    j.at("to_gear").get_to(e.to_gear);
    j.at("v").get_to(e.v);
    j.at("v_prev").get_to(e.v_prev);
    j.at("pedal").get_to(e.pedal);
}

void to_json(nlohmann::json& j, const DownshiftMap& m) {
    j = nlohmann::json{{"cutoffs_mps", m.cutoffs}, {"interpolated", m.interpolated}};
}

void from_json(const nlohmann::json& j, DownshiftMap& m) {
    j.at("cutoffs_mps").get_to(m.cutoffs);
    j.at("interpolated").get_to(m.interpolated);
}

void to_json(nlohmann::json& j, const ExtractedConstants& c) {
    j = nlohmann::json{{"T_min_nm", c.T_min},         {"f_idle_gps", c.f_idle}, {"v_c_mps", c.v_c},
                       {"F_wc_n", c.F_wc},            {"K_downshift", c.K_downshift},
                       {"T_correction_nm", c.T_correction}};
}

void from_json(const nlohmann::json& j, ExtractedConstants& c) {
    j.at("T_min_nm").get_to(c.T_min);
    j.at("f_idle_gps").get_to(c.f_idle);
    j.at("v_c_mps").get_to(c.v_c);
    j.at("F_wc_n").get_to(c.F_wc);
    j.at("K_downshift").get_to(c.K_downshift);
    j.at("T_correction_nm").get_to(c.T_correction);
}

}  // namespace fuelred
