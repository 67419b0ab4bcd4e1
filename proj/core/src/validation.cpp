#include "fuelred/validation.hpp"

#include "fuelred/csv.hpp"
#include "fuelred/errors.hpp"
#include "fuelred/interp.hpp"
#include "fuelred/units.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace fuelred {

using json = nlohmann::json;

namespace {

std::size_t nearest_index(std::span<const double> t, double x) {
    const auto it = std::lower_bound(t.begin(), t.end(), x);
    auto idx = static_cast<std::size_t>(it - t.begin());
    if (idx == t.size()) {
        return t.size() - 1;
    }
    if (idx > 0 && x - t[idx - 1] <= t[idx] - x) {
        return idx - 1;
    }
    return idx;
}

Trace resample_trace(const Trace& src, std::span<const double> grid) {
    const std::size_t n = src.rows.size();
    std::vector<double> t(n), v(n), a(n), grade(n), speed(n), torque(n), pedal(n), fuel(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = src.rows[i];
        t[i] = r.t;
        v[i] = r.v;
        a[i] = r.a;
        grade[i] = r.grade;
        speed[i] = r.engine_speed;
        torque[i] = r.engine_torque;
        pedal[i] = r.pedal;
        fuel[i] = r.fuel;
    }
    Trace out;
    out.name = src.name;
    out.has_dynamics = src.has_dynamics;
    out.rows.reserve(grid.size());
    for (const double x : grid) {
        TraceRow r;
        r.t = x;
        r.v = interp_linear(t, v, x);
        r.a = interp_linear(t, a, x);
        r.grade = interp_linear(t, grade, x);
        r.engine_speed = interp_linear(t, speed, x);
        r.engine_torque = interp_linear(t, torque, x);
        r.pedal = interp_linear(t, pedal, x);
        r.fuel = interp_linear(t, fuel, x);
        const auto& nearest = src.rows[nearest_index(t, x)];
        r.gear = nearest.gear;
        r.flag = nearest.flag;
        out.rows.push_back(r);
    }
    return out;
}

template <typename F>
std::vector<double> column(const Trace& trace, F&& get) {
    std::vector<double> out;
    out.reserve(trace.rows.size());
    for (const auto& r : trace.rows) {
        out.push_back(get(r));
    }
    return out;
}

std::string fmt(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string fmt(const std::optional<double>& v, int precision) { return v ? fmt(*v, precision) : "-"; }

}  // namespace

AlignedPair align(const Trace& a, const Trace& b, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidDt("alignment step must be positive");
    }
    if (a.empty() || b.empty()) {
        throw NoOverlap("cannot align an empty trace");
    }
    const double start = std::max(a.rows.front().t, b.rows.front().t);
    const double end = std::min(a.rows.back().t, b.rows.back().t);
    if (end < start) {
        throw NoOverlap("traces '" + a.name + "' and '" + b.name + "' do not overlap in time");
    }
    const auto n = static_cast<std::size_t>(std::floor((end - start) / dt + 1e-9)) + 1;
    AlignedPair out;
    out.t.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.t[k] = start + static_cast<double>(k) * dt;
    }
    out.a = resample_trace(a, out.t);
    out.b = resample_trace(b, out.t);
    return out;
}

double mae(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) {
        throw LengthMismatch("mae needs equal non-empty series, got " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += std::abs(a[i] - b[i]);
    }
    return sum / static_cast<double>(a.size());
}

CumulativeFuel cumulative_fuel(std::span<const double> t, std::span<const double> fuel) {
    if (t.size() != fuel.size()) {
        throw LengthMismatch("time and fuel columns differ in length");
    }
    CumulativeFuel out;
    out.running.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i > 0) {
            out.total += 0.5 * (fuel[i] + fuel[i - 1]) * (t[i] - t[i - 1]);
        }
        out.running.push_back(out.total);
    }
    return out;
}

CumulativeFuel cumulative_fuel(const Trace& trace) { return cumulative_fuel(trace.times(), trace.fuel()); }

double cumulative_error_pct(double ref_total, double model_total) {
    if (!(ref_total > 0.0)) {
        throw ZeroReference("reference cumulative fuel is " + std::to_string(ref_total) + " g");
    }
    return 100.0 * std::abs(model_total - ref_total) / ref_total;
}

double cumulative_error_pct(const Trace& ref, const Trace& model) {
    return cumulative_error_pct(cumulative_fuel(ref).total, cumulative_fuel(model).total);
}

GearMetrics gear_metrics(std::span<const int> ref, std::span<const int> model) {
    if (ref.size() != model.size() || ref.empty()) {
        throw LengthMismatch("gear series differ in length or are empty");
    }
    double abs_sum = 0.0;
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const int d = std::abs(ref[i] - model[i]);
        abs_sum += d;
        mismatches += d != 0 ? 1 : 0;
    }
    const auto n = static_cast<double>(ref.size());
    return {abs_sum / n, 100.0 * static_cast<double>(mismatches) / n};
}

PairMetrics compare(const AlignedPair& aligned, double dt) {
    PairMetrics m;
    m.dt = dt;
    m.steps = aligned.t.size();
    const auto& ref = aligned.a;
    const auto& model = aligned.b;
    m.mae_fuel = mae(ref.fuel(), model.fuel());
    m.cumulative_fuel_ref = cumulative_fuel(ref).total;
    m.cumulative_fuel_model = cumulative_fuel(model).total;
    m.cumulative_error_pct = cumulative_error_pct(m.cumulative_fuel_ref, m.cumulative_fuel_model);
    if (ref.has_dynamics && model.has_dynamics) {
        const auto rpm = [](const TraceRow& r) { return units::radps_to_rpm(r.engine_speed); };
        const auto torque = [](const TraceRow& r) { return r.engine_torque; };
        const auto pedal = [](const TraceRow& r) { return r.pedal; };
        m.mae_engine_speed = mae(column(ref, rpm), column(model, rpm));
        m.mae_engine_torque = mae(column(ref, torque), column(model, torque));
        m.mae_pedal = mae(column(ref, pedal), column(model, pedal));
        std::vector<int> gr, gm;
        for (std::size_t i = 0; i < ref.rows.size(); ++i) {
            gr.push_back(ref.rows[i].gear);
            gm.push_back(model.rows[i].gear);
        }
        const auto g = gear_metrics(gr, gm);
        m.mae_gear = g.mae_gear;
        m.gear_mismatch_pct = g.mismatch_pct;
    }
    return m;
}

ValidationReport build_report(std::span<const ValidationPair> pairs, double dt) {
    if (pairs.empty()) {
        throw ConfigError("validation report needs at least one pair");
    }
    ValidationReport report;
    report.dt = dt;
    for (const auto& p : pairs) {
        if (report.pairs.count(p.name) != 0) {
            throw ConfigError("duplicate validation pair name '" + p.name + "'");
        }
        auto m = compare(align(p.ref, p.model, dt), dt);
        m.cycle = p.cycle;
        m.ref_id = p.ref_id;
        m.model_id = p.model_id;
        report.pairs.emplace(p.name, std::move(m));
    }
    return report;
}

std::string format_report(const ValidationReport& report) {
    std::string out;
    char line[512];
    std::snprintf(line, sizeof line, "%-36s %10s %10s %10s %8s %10s %9s %9s %8s %9s\n", "pair", "mae_fuel",
                  "cum_ref_g", "cum_mod_g", "cum_err%", "mae_N_rpm", "mae_T_nm", "mae_ped%", "mae_gear",
                  "gear_mis%");
    out += line;
    for (const auto& [name, m] : report.pairs) {
        std::snprintf(line, sizeof line, "%-36s %10s %10s %10s %8s %10s %9s %9s %8s %9s\n", name.c_str(),
                      fmt(m.mae_fuel, 4).c_str(), fmt(m.cumulative_fuel_ref, 2).c_str(),
                      fmt(m.cumulative_fuel_model, 2).c_str(), fmt(m.cumulative_error_pct, 2).c_str(),
                      fmt(m.mae_engine_speed, 1).c_str(), fmt(m.mae_engine_torque, 2).c_str(),
                      fmt(m.mae_pedal, 2).c_str(), fmt(m.mae_gear, 3).c_str(),
                      fmt(m.gear_mismatch_pct, 2).c_str());
        out += line;
    }
    return out;
}

void write_comparison_csv(const std::filesystem::path& path, const AlignedPair& aligned,
                          const std::string& comment) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    if (!comment.empty()) {
        out << "# " << comment << '\n';
    }
    out << "t,fuel_ref_gps,fuel_model_gps,cum_fuel_ref_g,cum_fuel_model_g,gear_ref,gear_model,"
           "engine_speed_ref_rpm,engine_speed_model_rpm,engine_torque_ref_nm,engine_torque_model_nm\n";
    const auto cum_ref = cumulative_fuel(aligned.a);
    const auto cum_model = cumulative_fuel(aligned.b);
    const auto dyn = [](const Trace& tr, std::size_t i, auto get) -> std::string {
        return tr.has_dynamics ? get(tr.rows[i]) : std::string();
    };
    const auto gear = [](const TraceRow& r) { return std::to_string(r.gear); };
    const auto rpm = [](const TraceRow& r) { return csv::format(units::radps_to_rpm(r.engine_speed)); };
    const auto torque = [](const TraceRow& r) { return csv::format(r.engine_torque); };
    for (std::size_t i = 0; i < aligned.t.size(); ++i) {
        out << csv::format(aligned.t[i]) << ',' << csv::format(aligned.a.rows[i].fuel) << ','
            << csv::format(aligned.b.rows[i].fuel) << ',' << csv::format(cum_ref.running[i]) << ','
            << csv::format(cum_model.running[i]) << ',' << dyn(aligned.a, i, gear) << ','
            << dyn(aligned.b, i, gear) << ',' << dyn(aligned.a, i, rpm) << ',' << dyn(aligned.b, i, rpm) << ','
            << dyn(aligned.a, i, torque) << ',' << dyn(aligned.b, i, torque) << '\n';
    }
}

std::string comparison_file_name(const std::string& cycle, const std::string& model_id, const std::string& ref_id) {
    return cycle + "_" + model_id + "_vs_" + ref_id + ".csv";
}

void to_json(json& j, const PairMetrics& m) {
    const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    j = json{{"cycle", m.cycle},
             {"reference", m.ref_id},
             {"model", m.model_id},
             {"dt_s", m.dt},
             {"steps", m.steps},
             {"mae_fuel_gps", m.mae_fuel},
             {"cumulative_fuel_ref_g", m.cumulative_fuel_ref},
             {"cumulative_fuel_model_g", m.cumulative_fuel_model},
             {"cumulative_error_pct", m.cumulative_error_pct},
             {"mae_engine_speed_rpm", opt(m.mae_engine_speed)},
             {"mae_engine_torque_nm", opt(m.mae_engine_torque)},
             {"mae_pedal_pct", opt(m.mae_pedal)},
             {"mae_gear", opt(m.mae_gear)},
             {"gear_mismatch_pct", opt(m.gear_mismatch_pct)}};
}

void from_json(const json& j, PairMetrics& m) {
    const auto opt = [&](const char* key) -> std::optional<double> {
        const auto& v = j.at(key);
        return v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
    };
    j.at("cycle").get_to(m.cycle);
    j.at("reference").get_to(m.ref_id);
    j.at("model").get_to(m.model_id);
    j.at("dt_s").get_to(m.dt);
    j.at("steps").get_to(m.steps);
    j.at("mae_fuel_gps").get_to(m.mae_fuel);
    j.at("cumulative_fuel_ref_g").get_to(m.cumulative_fuel_ref);
    j.at("cumulative_fuel_model_g").get_to(m.cumulative_fuel_model);
    j.at("cumulative_error_pct").get_to(m.cumulative_error_pct);
    m.mae_engine_speed = opt("mae_engine_speed_rpm");
    m.mae_engine_torque = opt("mae_engine_torque_nm");
    m.mae_pedal = opt("mae_pedal_pct");
    m.mae_gear = opt("mae_gear");
    m.gear_mismatch_pct = opt("gear_mismatch_pct");
}

void to_json(json& j, const ValidationReport& r) {
    j = json{{"dt_s", r.dt}, {"pairs", r.pairs}};
}

void from_json(const json& j, ValidationReport& r) {
    j.at("dt_s").get_to(r.dt);
    r.pairs = j.at("pairs").get<std::map<std::string, PairMetrics>>();
}

}  // namespace fuelred
