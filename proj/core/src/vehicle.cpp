#include "fuelred/vehicle.hpp"

#include "fuelred/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace fuelred {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw ConfigError(what);
    }
}

bool strictly_ascending(const std::vector<double>& xs) {
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) {
            return false;
        }
    }
    return true;
}

double interp_rows(const std::vector<double>& grid, const std::vector<std::vector<double>>& rows,
                   double pedal, std::size_t column) {
    std::vector<double> column_values(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        column_values[i] = rows[i][column];
    }
    return interp_linear(grid, column_values, pedal);
}

}  // namespace

double VehicleParams::gear_ratio(int gear) const {
    if (gear < 1 || gear > n_gears()) {
        throw GearOutOfRange("gear " + std::to_string(gear) + " outside [1, " + std::to_string(n_gears()) + "]");
    }
    return g_r[static_cast<std::size_t>(gear - 1)];
}

double VehicleParams::general_mass(int gear) const {
    if (gear < 1 || gear > n_gears()) {
        throw GearOutOfRange("gear " + std::to_string(gear) + " outside [1, " + std::to_string(n_gears()) + "]");
    }
    return m_general[static_cast<std::size_t>(gear - 1)];
}

double VehicleParams::top_speed() const noexcept {
    if (g_r.empty() || d_r <= 0.0) {
        return 0.0;
    }
    return N_max * r_tire / (d_r * g_r.back());
}

void VehicleParams::validate() const {
    require(std::isfinite(m_vehicle) && m_vehicle > 0.0, "m_vehicle must be positive");
    require(std::isfinite(r_tire) && r_tire > 0.0, "r_tire must be positive");
    require(std::isfinite(d_r) && d_r > 0.0, "d_r must be positive");
    require(!g_r.empty(), "at least one gear ratio required");
    require(m_general.size() == g_r.size(), "m_general and g_r must have one entry per gear");
    for (std::size_t i = 0; i < g_r.size(); ++i) {
        require(std::isfinite(g_r[i]) && g_r[i] > 0.0, "gear ratios must be positive");
        require(std::isfinite(m_general[i]) && m_general[i] > 0.0, "generalized masses must be positive");
        require(i == 0 || g_r[i] < g_r[i - 1], "gear ratios must be strictly decreasing");
    }
    require(std::isfinite(R_a) && std::isfinite(R_r) && std::isfinite(R_g), "road-load coefficients must be finite");
    require(std::isfinite(N_min) && N_min > 0.0, "N_min must be positive");
    require(std::isfinite(N_max) && N_max > N_min, "N_max must exceed N_min");
}

EngineFuelMap::EngineFuelMap(std::vector<double> n_grid, std::vector<double> t_grid, std::vector<double> fuel)
    : n_grid_(std::move(n_grid)), t_grid_(std::move(t_grid)), fuel_(std::move(fuel)) {
    require(n_grid_.size() >= 2 && t_grid_.size() >= 2, "fuel map needs at least a 2x2 grid");
    require(strictly_ascending(n_grid_) && strictly_ascending(t_grid_), "fuel map grids must be ascending");
    require(fuel_.size() == n_grid_.size() * t_grid_.size(), "fuel table size does not match its grids");
    const std::size_t nt = t_grid_.size();
    for (std::size_t i = 0; i < n_grid_.size(); ++i) {
        for (std::size_t j = 0; j < nt; ++j) {
            const double f = fuel_[i * nt + j];
            require(std::isfinite(f) && f >= 0.0, "fuel map values must be finite and non-negative");
            require(j == 0 || f >= fuel_[i * nt + j - 1], "fuel map must be non-decreasing in torque");
        }
    }
}

EngineFuelMap EngineFuelMap::from_willans(const WillansCoefficients& k, std::vector<double> n_grid,
                                          std::vector<double> t_grid) {
    std::vector<double> fuel;
    fuel.reserve(n_grid.size() * t_grid.size());
    for (const double n : n_grid) {
        for (const double t : t_grid) {
            fuel.push_back(std::max(0.0, (k.k1 * n * t + k.k2 * n + k.k3) / k.lhv));
        }
    }
    return EngineFuelMap(std::move(n_grid), std::move(t_grid), std::move(fuel));
}

double EngineFuelMap::operator()(double n, double t) const noexcept {
    const auto locate = [](const std::vector<double>& grid, double x, std::size_t& lo, double& w) {
        if (x <= grid.front()) {
            lo = 0;
            w = 0.0;
            return;
        }
        if (x >= grid.back()) {
            lo = grid.size() - 2;
            w = 1.0;
            return;
        }
        const auto it = std::upper_bound(grid.begin(), grid.end(), x);
        lo = static_cast<std::size_t>(it - grid.begin()) - 1;
        w = (x - grid[lo]) / (grid[lo + 1] - grid[lo]);
    };
    std::size_t i = 0;
    std::size_t j = 0;
    double wn = 0.0;
    double wt = 0.0;
    locate(n_grid_, n, i, wn);
    locate(t_grid_, t, j, wt);
    const std::size_t nt = t_grid_.size();
    const double f00 = fuel_[i * nt + j];
    const double f01 = fuel_[i * nt + j + 1];
    const double f10 = fuel_[(i + 1) * nt + j];
    const double f11 = fuel_[(i + 1) * nt + j + 1];
    return (1.0 - wn) * ((1.0 - wt) * f00 + wt * f01) + wn * ((1.0 - wt) * f10 + wt * f11);
}

double GearShiftMaps::v_upshift(double pedal, int gear) const {
    if (gear < 1 || static_cast<std::size_t>(gear) > upshift.front().size()) {
        throw GearOutOfRange("no upshift threshold for gear " + std::to_string(gear));
    }
    return interp_rows(pedal_grid, upshift, pedal, static_cast<std::size_t>(gear - 1));
}

double GearShiftMaps::v_downshift(double pedal, int gear) const {
    if (gear < 2 || static_cast<std::size_t>(gear) > downshift.front().size() + 1) {
        throw GearOutOfRange("no downshift threshold for gear " + std::to_string(gear));
    }
    return interp_rows(pedal_grid, downshift, pedal, static_cast<std::size_t>(gear - 2));
}

int GearShiftMaps::upshift_gear(double pedal, double v) const {
    const int top = static_cast<int>(upshift.front().size()) + 1;
    int gear = 1;
    while (gear < top && v > v_upshift(pedal, gear)) {
        ++gear;
    }
    return gear;
}

void GearShiftMaps::validate(int n_gears) const {
    require(!pedal_grid.empty() && strictly_ascending(pedal_grid), "pedal grid must be ascending");
    require(upshift.size() == pedal_grid.size() && downshift.size() == pedal_grid.size(),
            "shift tables need one row per pedal grid point");
    const auto per_row = static_cast<std::size_t>(n_gears - 1);
    require(n_gears >= 2, "shift maps need at least two gears");
    require(!torque_max.empty(), "T_max(N) curve is required");
    for (std::size_t i = 0; i < pedal_grid.size(); ++i) {
        require(upshift[i].size() == per_row && downshift[i].size() == per_row,
                "shift table rows need n_gears - 1 entries");
        for (std::size_t k = 0; k < per_row; ++k) {
            require(k == 0 || upshift[i][k] > upshift[i][k - 1], "upshift speeds must increase with gear");
            require(k == 0 || downshift[i][k] > downshift[i][k - 1], "downshift speeds must increase with gear");
            // downshift[i][k] belongs to gear k+2 and must sit below the
            // upshift threshold that brought the gearbox into that gear.
            require(downshift[i][k] < upshift[i][k], "hysteresis band between adjacent gears is empty");
        }
    }
}

void Vehicle::validate() const {
    params.validate();
    shift.validate(params.n_gears());
    require(reference.eta > 0.0 && reference.eta <= 1.0, "driveline efficiency must lie in (0, 1]");
    require(reference.idle_fuel > 0.0, "idle fuel rate must be positive");
    require(reference.fuel_cut_speed > 0.0, "fuel-cut speed must be positive");
    require(!fuel_map.n_grid().empty(), "engine fuel map is required");
}

WheelTorqueCurves derive_wheel_torque_curves(const VehicleParams& params, const Curve1D& torque_max,
                                             double eta, double speed_step) {
    const double v_top = params.top_speed();
    const auto points = static_cast<std::size_t>(std::ceil(v_top / speed_step)) + 1;
    std::vector<double> speeds(points);
    for (std::size_t i = 0; i < points; ++i) {
        speeds[i] = std::min(static_cast<double>(i) * speed_step, v_top);
    }
    if (points >= 2 && speeds[points - 1] <= speeds[points - 2]) {
        speeds.pop_back();
    }
    WheelTorqueCurves curves;
    std::vector<double> overall(speeds.size(), 0.0);
    for (int k = 1; k <= params.n_gears(); ++k) {
        const double ratio = params.gear_ratio(k) * params.d_r;
        std::vector<double> ys(speeds.size(), 0.0);
        for (std::size_t i = 0; i < speeds.size(); ++i) {
            const double n = speeds[i] * ratio / params.r_tire;
            if (n > params.N_max * (1.0 + 1e-12)) {
                continue;  // gear cannot reach this speed
            }
            const double n_eng = std::max(n, params.N_min);
            ys[i] = torque_max(n_eng) * ratio * eta;
            overall[i] = std::max(overall[i], ys[i]);
        }
        curves.by_gear.emplace_back(speeds, std::move(ys));
    }
    curves.overall = Curve1D(std::move(speeds), std::move(overall));
    return curves;
}

void to_json(json& j, const VehicleParams& p) {
    j = json{{"m_vehicle", p.m_vehicle}, {"m_general", p.m_general}, {"r_tire", p.r_tire},
             {"d_r", p.d_r},             {"g_r", p.g_r},             {"R_a", p.R_a},
             {"R_r", p.R_r},             {"R_g", p.R_g},             {"N_max", p.N_max},
             {"N_min", p.N_min}};
}

void from_json(const json& j, VehicleParams& p) {
    j.at("m_vehicle").get_to(p.m_vehicle);
    j.at("m_general").get_to(p.m_general);
    j.at("r_tire").get_to(p.r_tire);
    j.at("d_r").get_to(p.d_r);
    j.at("g_r").get_to(p.g_r);
    j.at("R_a").get_to(p.R_a);
    j.at("R_r").get_to(p.R_r);
    j.at("R_g").get_to(p.R_g);
    j.at("N_max").get_to(p.N_max);
    j.at("N_min").get_to(p.N_min);
}

void to_json(json& j, const Curve1D& c) { j = json{{"x", c.xs()}, {"y", c.ys()}}; }

void from_json(const json& j, Curve1D& c) {
    c = Curve1D(j.at("x").get<std::vector<double>>(), j.at("y").get<std::vector<double>>());
}

void to_json(json& j, const EngineFuelMap& m) {
    const std::size_t nt = m.t_grid().size();
    json rows = json::array();
    for (std::size_t i = 0; i < m.n_grid().size(); ++i) {
        rows.push_back(std::vector<double>(m.table().begin() + static_cast<std::ptrdiff_t>(i * nt),
                                           m.table().begin() + static_cast<std::ptrdiff_t>((i + 1) * nt)));
    }
    j = json{{"n_grid_radps", m.n_grid()}, {"t_grid_nm", m.t_grid()}, {"fuel_gps", rows}};
}

void from_json(const json& j, EngineFuelMap& m) {
    auto n_grid = j.at("n_grid_radps").get<std::vector<double>>();
    auto t_grid = j.at("t_grid_nm").get<std::vector<double>>();
    if (j.contains("willans")) {
        const auto& w = j.at("willans");
        WillansCoefficients k;
        w.at("k1").get_to(k.k1);
        w.at("k2").get_to(k.k2);
        w.at("k3").get_to(k.k3);
        if (w.contains("lhv")) {
            w.at("lhv").get_to(k.lhv);
        }
        m = EngineFuelMap::from_willans(k, std::move(n_grid), std::move(t_grid));
        return;
    }
    std::vector<double> flat;
    for (const auto& row : j.at("fuel_gps")) {
        for (const auto& v : row) {
            flat.push_back(v.get<double>());
        }
    }
    m = EngineFuelMap(std::move(n_grid), std::move(t_grid), std::move(flat));
}

void to_json(json& j, const GearShiftMaps& m) {
    j = json{{"pedal_grid_pct", m.pedal_grid},
             {"upshift_mps", m.upshift},
             {"downshift_mps", m.downshift},
             {"torque_max_nm", m.torque_max}};
}

void from_json(const json& j, GearShiftMaps& m) {
    j.at("pedal_grid_pct").get_to(m.pedal_grid);
    j.at("upshift_mps").get_to(m.upshift);
    j.at("downshift_mps").get_to(m.downshift);
    j.at("torque_max_nm").get_to(m.torque_max);
}

void to_json(json& j, const ReferenceSettings& s) {
    j = json{{"eta", s.eta},
             {"idle_torque_nm", s.idle_torque},
             {"idle_fuel_gps", s.idle_fuel},
             {"fuel_cut_speed_mps", s.fuel_cut_speed},
             {"fuel_cut_force_n", s.fuel_cut_force},
             {"torque_correction_nm", s.torque_correction}};
}

void from_json(const json& j, ReferenceSettings& s) {
    s = ReferenceSettings{};
    if (j.contains("eta")) {
        j.at("eta").get_to(s.eta);
    }
    j.at("idle_torque_nm").get_to(s.idle_torque);
    j.at("idle_fuel_gps").get_to(s.idle_fuel);
    j.at("fuel_cut_speed_mps").get_to(s.fuel_cut_speed);
    j.at("fuel_cut_force_n").get_to(s.fuel_cut_force);
    if (j.contains("torque_correction_nm")) {
        j.at("torque_correction_nm").get_to(s.torque_correction);
    }
}

void to_json(json& j, const Vehicle& v) {
    j = json{{"params", v.params}, {"engine_fuel_map", v.fuel_map}, {"shift_maps", v.shift},
             {"reference", v.reference}};
}

void from_json(const json& j, Vehicle& v) {
    j.at("params").get_to(v.params);
    j.at("engine_fuel_map").get_to(v.fuel_map);
    j.at("shift_maps").get_to(v.shift);
    j.at("reference").get_to(v.reference);
}

void to_json(json& j, const WheelTorqueCurves& c) {
    j = json{{"overall", c.overall}, {"by_gear", c.by_gear}};
}

void from_json(const json& j, WheelTorqueCurves& c) {
    j.at("overall").get_to(c.overall);
    j.at("by_gear").get_to(c.by_gear);
}

Vehicle load_vehicle(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open vehicle file " + path.string());
    }
    Vehicle vehicle;
    try {
        json::parse(in).get_to(vehicle);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    vehicle.validate();
    return vehicle;
}

void save_vehicle(const std::filesystem::path& path, const Vehicle& vehicle) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << json(vehicle).dump(2) << '\n';
}

}  // namespace fuelred
