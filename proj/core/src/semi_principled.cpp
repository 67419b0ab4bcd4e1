#include "fuelred/semi_principled.hpp"

#include "fuelred/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace fuelred {

using json = nlohmann::json;

PrincipledInputs PrincipledInputs::from_vehicle(const Vehicle& vehicle) {
    PrincipledInputs in;
    in.params = vehicle.params;
    in.pedal_grid = vehicle.shift.pedal_grid;
    in.upshift = vehicle.shift.upshift;
    in.torque_max = vehicle.shift.torque_max;
    in.wheel_torque = derive_wheel_torque_curves(vehicle.params, vehicle.shift.torque_max, vehicle.reference.eta);
    return in;
}

SemiPrincipledModel::SemiPrincipledModel(PrincipledInputs principled, ExtractedConstants constants,
                                         PolyMap2D fuel_map, std::vector<PolyMap2D> speed_maps,
                                         std::vector<PolyMap2D> torque_maps, SemiMetadata metadata)
    : principled_(std::move(principled)),
      constants_(std::move(constants)),
      fuel_map_(std::move(fuel_map)),
      speed_maps_(std::move(speed_maps)),
      torque_maps_(std::move(torque_maps)),
      metadata_(std::move(metadata)) {
    const auto& p = principled_.params;
    p.validate();
    const auto n = static_cast<std::size_t>(p.n_gears());
    if (speed_maps_.size() != n || torque_maps_.size() != n) {
        throw ConfigError("semi-principled model needs one speed and one torque map per gear");
    }
    if (constants_.K_downshift.cutoffs.size() != n) {
        throw ConfigError("downshift map needs one cutoff per gear");
    }
    upshift_.pedal_grid = principled_.pedal_grid;
    upshift_.upshift = principled_.upshift;
    upshift_.torque_max = principled_.torque_max;
    if (upshift_.pedal_grid.empty() || upshift_.upshift.size() != upshift_.pedal_grid.size()) {
        throw ConfigError("upshift map needs one row per pedal grid point");
    }
    for (const auto& row : upshift_.upshift) {
        if (row.size() + 1 != n) {
            throw ConfigError("upshift map rows need n_gears - 1 entries");
        }
    }
    if (principled_.wheel_torque.by_gear.size() != n) {
        throw ConfigError("wheel torque curves need one entry per gear");
    }
    v_max_ = p.top_speed();
}

double SemiPrincipledModel::pedal_for(double force, double v) const noexcept {
    const double limit = principled_.wheel_torque.overall(v);
    if (!(limit > 0.0)) {
        return 0.0;
    }
    return std::clamp(100.0 * force * principled_.params.r_tire / limit, 0.0, 100.0);
}

int SemiPrincipledModel::select_gear(double v, double a, double grade) const {
    const auto& p = principled_.params;
    if (v < kStandstillSpeed) {
        return 1;
    }
    const int top = p.n_gears();
    // The pedal depends on the gear through the rotating mass term; start
    // from top gear and refine once with the chosen gear.
    int gear = upshift_.upshift_gear(pedal_for(wheel_force(p, v, a, grade, top), v), v);
    gear = upshift_.upshift_gear(pedal_for(wheel_force(p, v, a, grade, gear), v), v);
    if (a < 0.0) {
        gear = std::max(gear, constants_.K_downshift.highest_gear(v));
    }
    const double n_out = transmission_output_speed(p, v);
    while (gear < top && n_out * p.gear_ratio(gear) > p.N_max) {
        ++gear;
    }
    return gear;
}

double SemiPrincipledModel::map_torque(int gear, double n_output, double force) const {
    if (gear < 1 || gear > principled_.params.n_gears()) {
        throw GearOutOfRange("gear " + std::to_string(gear) + " outside the fitted maps");
    }
    return torque_maps_[static_cast<std::size_t>(gear - 1)](n_output, force);
}

SemiOutput SemiPrincipledModel::eval(double v, double a, double grade) const {
    const auto& p = principled_.params;
    SemiOutput out;
    const double vc = std::clamp(v, 0.0, v_max_);
    const double ac = std::clamp(a, -kMaxAbsAccel, kMaxAbsAccel);
    const double gc = std::clamp(grade, -kMaxAbsGrade, kMaxAbsGrade);
    out.clamped = vc != v || ac != a || gc != grade;

    if (vc < kStandstillSpeed) {
        out.gear = 1;
        out.engine_speed = p.N_min;
        out.engine_torque = constants_.T_min;
        out.fuel = constants_.f_idle;
        out.wheel_force = wheel_force(p, vc, ac, gc, 1);
        return out;
    }

    out.gear = select_gear(vc, ac, gc);
    const auto k = static_cast<std::size_t>(out.gear - 1);
    double force = wheel_force(p, vc, ac, gc, out.gear);
    const double force_max = principled_.wheel_torque.by_gear[k](vc) / p.r_tire;
    if (force_max > 0.0 && force > force_max) {
        force = force_max;
        out.clamped = true;
        out.saturated = true;
    }
    out.wheel_force = force;
    out.pedal = pedal_for(force, vc);

    const double n_out = transmission_output_speed(p, vc);
    // The per-gear maps are low-degree and extrapolate benignly; the
    // physical engine limits below bound their outputs.
    out.engine_speed = std::clamp(speed_maps_[k](n_out, force), p.N_min, p.N_max);
    double torque = torque_maps_[k](n_out, force);
    if (out.gear == 1) {
        torque += constants_.T_correction(ac);
    }
    const double t_max = std::max(principled_.torque_max(out.engine_speed), constants_.T_min);
    out.saturated = out.saturated || torque > t_max;
    out.engine_torque = std::clamp(torque, constants_.T_min, t_max);

    if (vc > constants_.v_c && force < constants_.F_wc) {
        out.fuel = 0.0;
    } else {
        out.fuel = std::max(0.0, fuel_map_.eval_clamped(out.engine_speed, out.engine_torque));
    }
    return out;
}

SemiPrincipledModel SemiPrincipledModel::with_torque_correction(Curve1D correction) const {
    SemiPrincipledModel copy = *this;
    copy.constants_.T_correction = std::move(correction);
    return copy;
}

Trace eval_semi_trace(const SemiPrincipledModel& model, std::span<const KinematicRow> rows,
                      const GradeProfile& grade) {
    Trace trace;
    trace.rows.reserve(rows.size());
    for (const auto& in : rows) {
        TraceRow row;
        row.t = in.t;
        row.v = in.v;
        row.a = in.a;
        row.grade = grade ? grade(in.t) : 0.0;
        const auto out = model.eval(row.v, row.a, row.grade);
        row.gear = out.gear;
        row.engine_speed = out.engine_speed;
        row.engine_torque = out.engine_torque;
        row.pedal = out.pedal;
        row.fuel = out.fuel;
        row.flag = out.clamped;
        trace.rows.push_back(row);
    }
    return trace;
}

SemiPrincipledModel derive_semi_model(const Vehicle& vehicle, std::span<const DriveCycle> cycles,
                                      const ExtractionOptions& options) {
    const auto standard = run_vcd(vehicle, cycles, {options.dt, false});
    const auto locked = run_vcd(vehicle, cycles, {options.dt, true});
    return derive_semi_model(PrincipledInputs::from_vehicle(vehicle), standard, locked, options);
}

SemiPrincipledModel assemble_semi_model(const PrincipledInputs& principled, const ExtractedConstants& constants,
                                        const VcdDataset& locked, const MapFitOptions& options) {
    const auto maps = fit_all_maps(locked, options);
    SemiMetadata meta;
    for (const auto& trace : locked.traces) {
        meta.source_cycles.push_back(trace.name);
    }
    meta.fuel_rms = maps.fuel.rms_residual;
    std::vector<PolyMap2D> speed_maps;
    std::vector<PolyMap2D> torque_maps;
    for (std::size_t k = 0; k < maps.engine_speed.size(); ++k) {
        speed_maps.push_back(maps.engine_speed[k].map);
        torque_maps.push_back(maps.engine_torque[k].map);
        meta.speed_rms.push_back(maps.engine_speed[k].rms_residual);
        meta.torque_rms.push_back(maps.engine_torque[k].rms_residual);
    }
    return SemiPrincipledModel(principled, constants, maps.fuel.map, std::move(speed_maps), std::move(torque_maps),
                               std::move(meta));
}

SemiPrincipledModel derive_semi_model(const PrincipledInputs& principled, const VcdDataset& standard,
                                      const VcdDataset& locked, const ExtractionOptions& options) {
    ExtractedConstants constants;
    const auto idle = extract_idle_constants(standard);
    constants.T_min = idle.T_min;
    constants.f_idle = idle.f_idle;
    const auto cut = extract_fuel_cut_thresholds(standard);
    constants.v_c = cut.v_c;
    constants.F_wc = cut.F_wc;
    constants.K_downshift = extract_downshift_map(standard);

    const auto draft = assemble_semi_model(principled, constants, locked, options.maps);
    return draft.with_torque_correction(extract_torque_correction(standard, draft, options.correction));
}

void to_json(json& j, const SemiPrincipledModel& m) {
    const auto& pr = m.principled();
    const auto& meta = m.metadata();
    j = json{
        {"principled",
         {{"params", pr.params},
          {"pedal_grid_pct", pr.pedal_grid},
          {"upshift_mps", pr.upshift},
          {"torque_max_nm", pr.torque_max},
          {"wheel_torque_max_nm", pr.wheel_torque}}},
        {"constants", m.constants()},
        {"fuel_map", m.fuel_map()},
        {"engine_speed_maps", m.speed_maps()},
        {"engine_torque_maps", m.torque_maps()},
        {"metadata",
         {{"source_cycles", meta.source_cycles},
          {"fuel_rms_gps", meta.fuel_rms},
          {"engine_speed_rms_radps", meta.speed_rms},
          {"engine_torque_rms_nm", meta.torque_rms}}},
    };
}

SemiPrincipledModel semi_model_from_json(const json& j) {
    try {
        PrincipledInputs pr;
        const auto& jp = j.at("principled");
        jp.at("params").get_to(pr.params);
        jp.at("pedal_grid_pct").get_to(pr.pedal_grid);
        jp.at("upshift_mps").get_to(pr.upshift);
        jp.at("torque_max_nm").get_to(pr.torque_max);
        jp.at("wheel_torque_max_nm").get_to(pr.wheel_torque);
        SemiMetadata meta;
        if (j.contains("metadata")) {
            const auto& jm = j.at("metadata");
            jm.at("source_cycles").get_to(meta.source_cycles);
            jm.at("fuel_rms_gps").get_to(meta.fuel_rms);
            jm.at("engine_speed_rms_radps").get_to(meta.speed_rms);
            jm.at("engine_torque_rms_nm").get_to(meta.torque_rms);
        }
        return SemiPrincipledModel(std::move(pr), j.at("constants").get<ExtractedConstants>(),
                                   j.at("fuel_map").get<PolyMap2D>(),
                                   j.at("engine_speed_maps").get<std::vector<PolyMap2D>>(),
                                   j.at("engine_torque_maps").get<std::vector<PolyMap2D>>(), std::move(meta));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("semi-principled model: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("semi-principled model: ") + e.what());
    }
}

void save_semi_model(const std::filesystem::path& path, const SemiPrincipledModel& model, const json& provenance) {
    json j = model;
    if (!provenance.is_null()) {
        j["provenance"] = provenance;
    }
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

SemiPrincipledModel load_semi_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open semi-principled model " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return semi_model_from_json(j);
}

}  // namespace fuelred
