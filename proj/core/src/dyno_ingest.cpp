#include "fuelred/dyno_ingest.hpp"

#include "fuelred/csv.hpp"
#include "fuelred/interp.hpp"
#include "fuelred/units.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fuelred {

using json = nlohmann::json;

namespace {

constexpr double kConvergence = 1e-3;     // m/s^2
constexpr double kDivergenceSlack = 1e-9;  // m/s^2

double max_abs(std::span<const double> xs) {
    double m = 0.0;
    for (const double x : xs) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

std::vector<DynoRow> rows_in(const DynoLog& log, const TimeWindow& w) {
    std::vector<DynoRow> out;
    for (const auto& r : log.rows) {
        if (r.t >= w.start && r.t <= w.end) {
            out.push_back(r);
        }
    }
    return out;
}

}  // namespace

void DynoLog::validate() const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (!std::isfinite(r.t) || (i > 0 && r.t < rows[i - 1].t)) {
            throw MonotonicityError(name + ": time decreases at row " + std::to_string(i + 1));
        }
        if (!(r.fuel_gps >= 0.0)) {
            throw ParseError(name + ": negative fuel rate at row " + std::to_string(i + 1));
        }
        if (!std::isfinite(r.water_temp_c)) {
            throw ParseError(name + ": non-finite water temperature at row " + std::to_string(i + 1));
        }
    }
}

DynoLog parse_dyno_log(std::string_view text, const std::string& name) {
    const auto table = csv::parse(text);
    std::string joined;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        joined += (i ? "," : "") + table.header[i];
    }
    if (joined != kDynoHeader) {
        throw ParseError(name + ": expected header '" + kDynoHeader + "', got '" + joined + "'");
    }
    DynoLog log;
    log.name = name;
    log.rows.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& f = table.rows[i];
        const auto where = name + " line " + std::to_string(table.line_numbers[i]);
        if (f.size() != table.header.size()) {
            throw ParseError(where + ": expected " + std::to_string(table.header.size()) + " fields");
        }
        auto num = [&](std::size_t col) {
            const auto v = csv::to_double(f[col]);
            if (!v) {
                throw ParseError(where + ": malformed number in column " + table.header[col]);
            }
            return *v;
        };
        const auto gear = csv::to_long(f[7]);
        if (!gear) {
            throw ParseError(where + ": malformed gear");
        }
        log.rows.push_back({num(0), num(1), num(2), num(3), num(4), num(5), num(6), static_cast<int>(*gear),
                            num(8)});
    }
    log.validate();
    return log;
}

DynoLog load_dyno_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open dyno log " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_dyno_log(buf.str(), path.stem().string());
}

void write_dyno_log(const std::filesystem::path& path, const DynoLog& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << kDynoHeader << '\n';
    for (const auto& r : log.rows) {
        out << csv::format(r.t) << ',' << csv::format(r.v_kph) << ',' << csv::format(r.engine_rpm) << ','
            << csv::format(r.engine_torque_nm) << ',' << csv::format(r.pedal_pct) << ','
            << csv::format(r.fuel_gps) << ',' << csv::format(r.water_temp_c) << ',' << r.gear << ','
            << csv::format(r.trans_out_rpm) << '\n';
    }
}

double fit_speed_regression(const DynoLog& log, std::size_t min_rows) {
    double sxy = 0.0;
    double sxx = 0.0;
    std::size_t n = 0;
    for (const auto& r : log.rows) {
        if (r.v_kph > 0.0) {
            sxy += r.v_kph * r.trans_out_rpm;
            sxx += r.trans_out_rpm * r.trans_out_rpm;
            ++n;
        }
    }
    if (n < min_rows || sxx == 0.0) {
        throw InsufficientData(log.name + ": " + std::to_string(n) + " moving rows with output speed, need " +
                               std::to_string(min_rows));
    }
    const double slope = sxy / sxx;
    if (!(slope > 0.0)) {
        throw NonPositiveSlope(log.name + ": regression slope " + std::to_string(slope));
    }
    return slope;
}

std::vector<double> derive_speed(const DynoLog& log, double slope) {
    std::vector<double> v;
    v.reserve(log.rows.size());
    for (const auto& r : log.rows) {
        v.push_back(units::kph_to_mps(std::max(0.0, slope * r.trans_out_rpm)));
    }
    return v;
}

std::vector<double> smooth_speed(std::span<const double> series, double mu, int steps) {
    if (series.size() < 3) {
        throw SeriesTooShort("smoothing needs at least 3 samples, got " + std::to_string(series.size()));
    }
    if (!(mu >= 0.0 && mu <= 1.0) || steps < 0) {
        throw std::invalid_argument("smoothing needs 0 <= mu <= 1 and steps >= 0");
    }
    std::vector<double> cur(series.begin(), series.end());
    std::vector<double> next = cur;
    for (int s = 0; s < steps; ++s) {
        for (std::size_t i = 1; i + 1 < cur.size(); ++i) {
            next[i] = 0.5 * mu * cur[i - 1] + (1.0 - mu) * cur[i] + 0.5 * mu * cur[i + 1];
        }
        std::swap(cur, next);
    }
    return cur;
}

std::vector<double> derive_acceleration(std::span<const double> series, double dt) {
    return finite_difference(series, dt);
}

std::vector<double> clip_outliers(std::span<const double> accel, double fraction) {
    if (!(fraction >= 0.0 && fraction < 0.5)) {
        throw std::invalid_argument("clip fraction must lie in [0, 0.5)");
    }
    std::vector<double> out(accel.begin(), accel.end());
    if (out.empty() || fraction == 0.0) {
        return out;
    }
    const double lo = percentile(accel, 100.0 * fraction);
    const double hi = percentile(accel, 100.0 * (1.0 - fraction));
    for (auto& a : out) {
        a = std::clamp(a, lo, hi);
    }
    return out;
}

SmoothingResult auto_select_smoothing(std::span<const double> series, double dt, double bound, int max_steps,
                                      double mu) {
    if (max_steps < 1) {
        throw std::invalid_argument("max_steps must be >= 1");
    }
    SmoothingResult res;
    res.speed = smooth_speed(series, mu, 0);
    res.accel = derive_acceleration(res.speed, dt);
    res.max_abs_accel = max_abs(res.accel);
    for (int step = 0;; ++step) {
        if (res.max_abs_accel <= bound) {
            res.within_bound = true;
            return res;
        }
        if (step == max_steps) {
            throw BoundNotReached("max|a| = " + std::to_string(res.max_abs_accel) + " m/s^2 after " +
                                      std::to_string(step) + " smoothing steps",
                                  res);
        }
        SmoothingResult next;
        next.steps = step + 1;
        next.speed = smooth_speed(res.speed, mu, 1);
        next.accel = derive_acceleration(next.speed, dt);
        next.max_abs_accel = max_abs(next.accel);
        if (next.max_abs_accel > res.max_abs_accel + kDivergenceSlack) {
            throw SmoothingDiverged("max|a| rose from " + std::to_string(res.max_abs_accel) + " to " +
                                    std::to_string(next.max_abs_accel) + " at step " +
                                    std::to_string(next.steps));
        }
        const bool converged = res.max_abs_accel - next.max_abs_accel < kConvergence;
        res = std::move(next);
        if (converged && res.max_abs_accel > bound) {
            res.within_bound = false;
            return res;
        }
    }
}

TimeWindow hot_engine_window(const DynoLog& log, double threshold_c) {
    if (log.rows.empty() || log.rows.back().water_temp_c < threshold_c) {
        throw NeverHot(log.name + ": water temperature ends below " + std::to_string(threshold_c) + " C");
    }
    std::size_t first = 0;
    for (std::size_t i = log.rows.size(); i-- > 0;) {
        if (log.rows[i].water_temp_c < threshold_c) {
            first = i + 1;
            break;
        }
    }
    return {log.rows[first].t, log.rows.back().t};
}

ProcessedProfile ingest_dyno_log(const DynoLog& log, const IngestOptions& options) {
    if (!(options.dt > 0.0)) {
        throw InvalidDt("dyno resampling step must be positive");
    }
    log.validate();
    if (log.rows.empty()) {
        throw InsufficientData(log.name + ": empty dyno log");
    }
    ProcessedProfile profile;
    profile.name = log.name;
    auto& prov = profile.provenance;
    prov.mu = options.mu;
    prov.dt = options.dt;
    prov.clip_fraction = options.clip_fraction;

    const TimeWindow window = options.hot_window ? hot_engine_window(log, options.hot_threshold_c)
                                                 : TimeWindow{log.rows.front().t, log.rows.back().t};
    prov.window_start = window.start;
    prov.window_end = window.end;

    prov.slope = fit_speed_regression(log, options.min_regression_rows);
    DynoLog hot{log.name, rows_in(log, window)};
    const auto raw_speed = derive_speed(hot, prov.slope);
    std::vector<double> raw_t;
    raw_t.reserve(hot.rows.size());
    for (const auto& r : hot.rows) {
        raw_t.push_back(r.t);
    }

    const auto n = static_cast<std::size_t>(std::floor((window.end - window.start) / options.dt + 1e-9)) + 1;
    std::vector<double> t(n);
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
        t[k] = window.start + static_cast<double>(k) * options.dt;
        v[k] = interp_linear(raw_t, raw_speed, t[k]);
    }
    prov.raw_max_abs_accel = max_abs(derive_acceleration(v, options.dt));

    SmoothingResult smooth;
    try {
        smooth = auto_select_smoothing(v, options.dt, options.accel_bound, options.max_smoothing_steps, options.mu);
    } catch (const BoundNotReached& e) {
        smooth = e.best();
    }
    prov.smoothing_steps = smooth.steps;
    prov.smoothed_max_abs_accel = smooth.max_abs_accel;
    prov.within_bound = smooth.within_bound;

    auto accel = clip_outliers(smooth.accel, options.clip_fraction);
    for (auto& a : accel) {
        if (std::abs(a) > options.accel_bound) {
            a = std::clamp(a, -options.accel_bound, options.accel_bound);
            ++prov.bound_clamped;
        }
    }
    profile.rows.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        profile.rows.push_back({t[k], std::max(0.0, smooth.speed[k]), accel[k]});
    }
    return profile;
}

Trace dyno_reference_trace(const DynoLog& log, const ProcessedProfile& profile) {
    const std::size_t m = log.rows.size();
    std::vector<double> t(m), rpm(m), torque(m), pedal(m), fuel(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& r = log.rows[i];
        t[i] = r.t;
        rpm[i] = r.engine_rpm;
        torque[i] = r.engine_torque_nm;
        pedal[i] = r.pedal_pct;
        fuel[i] = r.fuel_gps;
    }
    Trace trace;
    trace.name = log.name;
    trace.rows.reserve(profile.rows.size());
    for (const auto& p : profile.rows) {
        TraceRow row;
        row.t = p.t;
        row.v = p.v;
        row.a = p.a;
        row.engine_speed = units::rpm_to_radps(interp_linear(t, rpm, p.t));
        row.engine_torque = interp_linear(t, torque, p.t);
        row.pedal = interp_linear(t, pedal, p.t);
        row.fuel = interp_linear(t, fuel, p.t);
        if (m > 0) {
            const auto it = std::lower_bound(t.begin(), t.end(), p.t);
            auto idx = static_cast<std::size_t>(it - t.begin());
            if (idx == m) {
                idx = m - 1;
            } else if (idx > 0 && p.t - t[idx - 1] <= t[idx] - p.t) {
                --idx;
            }
            row.gear = log.rows[idx].gear;
        }
        trace.rows.push_back(row);
    }
    return trace;
}

void write_profile_csv(const std::filesystem::path& path, const ProcessedProfile& profile,
                       const std::string& comment) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    if (!comment.empty()) {
        out << "# " << comment << '\n';
    }
    out << "t,v_mps,a_mps2\n";
    for (const auto& r : profile.rows) {
        out << csv::format(r.t) << ',' << csv::format(r.v) << ',' << csv::format(r.a) << '\n';
    }
}

ProcessedProfile read_profile_csv(const std::filesystem::path& path) {
    const auto table = csv::read_file(path);
    if (table.header != std::vector<std::string>{"t", "v_mps", "a_mps2"}) {
        throw ParseError(path.string() + ": expected header 't,v_mps,a_mps2'");
    }
    ProcessedProfile profile;
    profile.name = path.stem().string();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& f = table.rows[i];
        const auto where = path.string() + " line " + std::to_string(table.line_numbers[i]);
        if (f.size() != 3) {
            throw ParseError(where + ": expected 3 fields");
        }
        const auto t = csv::to_double(f[0]);
        const auto v = csv::to_double(f[1]);
        const auto a = csv::to_double(f[2]);
        if (!t || !v || !a) {
            throw ParseError(where + ": malformed number");
        }
        profile.rows.push_back({*t, *v, *a});
    }
    return profile;
}

void to_json(json& j, const IngestProvenance& p) {
    j = json{{"slope_kph_per_rpm", p.slope},
             {"smoothing_steps", p.smoothing_steps},
             {"mu", p.mu},
             {"clip_fraction", p.clip_fraction},
             {"dt_s", p.dt},
             {"window_start_s", p.window_start},
             {"window_end_s", p.window_end},
             {"raw_max_abs_accel_mps2", p.raw_max_abs_accel},
             {"smoothed_max_abs_accel_mps2", p.smoothed_max_abs_accel},
             {"within_bound", p.within_bound},
             {"bound_clamped", p.bound_clamped},
             {"outlier_handling", "winsorized"}};
}

void from_json(const json& j, IngestProvenance& p) {
    j.at("slope_kph_per_rpm").get_to(p.slope);
    j.at("smoothing_steps").get_to(p.smoothing_steps);
    j.at("mu").get_to(p.mu);
    j.at("clip_fraction").get_to(p.clip_fraction);
    j.at("dt_s").get_to(p.dt);
    j.at("window_start_s").get_to(p.window_start);
    j.at("window_end_s").get_to(p.window_end);
    j.at("raw_max_abs_accel_mps2").get_to(p.raw_max_abs_accel);
    j.at("smoothed_max_abs_accel_mps2").get_to(p.smoothed_max_abs_accel);
    j.at("within_bound").get_to(p.within_bound);
    j.at("bound_clamped").get_to(p.bound_clamped);
}

}  // namespace fuelred
