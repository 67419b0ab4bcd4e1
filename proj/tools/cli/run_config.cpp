#include "cli/run_config.hpp"

#include "fuelred/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace fuelred::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
    if (!obj.is_object()) {
        throw ConfigError(where + " must be an object");
    }
    for (const auto& [key, value] : obj.items()) {
        if (!known.count(key)) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback, const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

Range range_or(const json& obj, const std::string& key, Range fallback, const std::string& where) {
    const auto pair = get_or<std::vector<double>>(obj, key, {fallback.lo, fallback.hi}, where);
    if (pair.size() != 2) {
        throw ConfigError(where + "." + key + " must be [lo, hi]");
    }
    return {pair[0], pair[1]};
}

PolyDegree degree_or(const json& obj, const std::string& key, PolyDegree fallback, const std::string& where) {
    const auto pair = get_or<std::vector<int>>(obj, key, {fallback.x, fallback.y}, where);
    if (pair.size() != 2 || pair[0] < 0 || pair[1] < 0) {
        throw ConfigError(where + "." + key + " must be [degree_x, degree_y] with non-negative entries");
    }
    if (pair[0] + pair[1] > kMaxMapTotalDegree) {
        throw ConfigError(where + "." + key + " exceeds the total degree cap of " +
                          std::to_string(kMaxMapTotalDegree));
    }
    return {pair[0], pair[1]};
}

std::filesystem::path existing(const std::filesystem::path& base, const std::string& rel, const std::string& what) {
    if (rel.empty()) {
        throw ConfigError(what + " path is empty");
    }
    auto p = std::filesystem::path(rel);
    if (p.is_relative()) {
        p = base / p;
    }
    p = p.lexically_normal();
    if (!std::filesystem::is_regular_file(p)) {
        throw MissingPrerequisite(what + " '" + p.string() + "' does not exist");
    }
    return p;
}

}  // namespace

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir, const ConfigOverrides& overrides) {
    reject_unknown(doc,
                   {"vehicle", "cycles", "cycle_unit", "dt", "dyno_logs", "output_dir", "seed", "svg", "extraction",
                    "simplified", "ingest"},
                   "config");
    RunConfig cfg;
    json canon;

    if (!doc.contains("vehicle")) {
        throw ConfigError("config needs a 'vehicle' path");
    }
    const auto vehicle = get_or<std::string>(doc, "vehicle", "", "config");
    cfg.vehicle = existing(base_dir, vehicle, "vehicle file");
    canon["vehicle"] = vehicle;

    const auto cycles = get_or<std::vector<std::string>>(doc, "cycles", {}, "config");
    if (cycles.empty()) {
        throw ConfigError("config needs at least one entry in 'cycles'");
    }
    for (const auto& c : cycles) {
        cfg.cycles.push_back(existing(base_dir, c, "cycle file"));
    }
    canon["cycles"] = cycles;

    const auto unit = overrides.unit.value_or(get_or<std::string>(doc, "cycle_unit", "mps", "config"));
    cfg.cycle_unit = parse_speed_unit(unit);
    canon["cycle_unit"] = unit;

    cfg.dt = overrides.dt.value_or(get_or<double>(doc, "dt", kDefaultDt, "config"));
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt) || cfg.dt > 1.0) {
        throw ConfigError("dt must be in (0, 1] s");
    }
    canon["dt"] = cfg.dt;

    const auto dyno = get_or<std::vector<std::string>>(doc, "dyno_logs", {}, "config");
    for (const auto& d : dyno) {
        cfg.dyno_logs.push_back(existing(base_dir, d, "dyno log"));
    }
    canon["dyno_logs"] = dyno;

    if (overrides.output_dir) {
        cfg.output_dir = *overrides.output_dir;
    } else {
        const auto out = get_or<std::string>(doc, "output_dir", "out", "config");
        cfg.output_dir = std::filesystem::path(out).is_relative() ? base_dir / out : std::filesystem::path(out);
    }
    cfg.output_dir = cfg.output_dir.lexically_normal();

    cfg.seed = get_or<std::uint64_t>(doc, "seed", cfg.seed, "config");
    canon["seed"] = cfg.seed;
    cfg.svg = get_or<bool>(doc, "svg", false, "config");
    canon["svg"] = cfg.svg;

    const json ex = doc.value("extraction", json::object());
    reject_unknown(ex,
                   {"fuel_degree", "speed_degree", "torque_degree", "min_samples", "correction_bins",
                    "correction_accel_range"},
                   "extraction");
    cfg.maps.fuel_degree = degree_or(ex, "fuel_degree", cfg.maps.fuel_degree, "extraction");
    cfg.maps.speed_degree = degree_or(ex, "speed_degree", cfg.maps.speed_degree, "extraction");
    cfg.maps.torque_degree = degree_or(ex, "torque_degree", cfg.maps.torque_degree, "extraction");
    cfg.maps.max_total_degree = kMaxMapTotalDegree;
    cfg.maps.min_samples = get_or<std::size_t>(ex, "min_samples", cfg.maps.min_samples, "extraction");
    cfg.correction.bins = get_or<int>(ex, "correction_bins", cfg.correction.bins, "extraction");
    const auto corr = range_or(ex, "correction_accel_range", {cfg.correction.a_min, cfg.correction.a_max}, "extraction");
    cfg.correction.a_min = corr.lo;
    cfg.correction.a_max = corr.hi;
    if (cfg.correction.bins < 1 || !(corr.hi > corr.lo)) {
        throw ConfigError("extraction correction bins must be >= 1 over a non-empty range");
    }
    canon["extraction"] = {{"fuel_degree", {cfg.maps.fuel_degree.x, cfg.maps.fuel_degree.y}},
                           {"speed_degree", {cfg.maps.speed_degree.x, cfg.maps.speed_degree.y}},
                           {"torque_degree", {cfg.maps.torque_degree.x, cfg.maps.torque_degree.y}},
                           {"min_samples", cfg.maps.min_samples},
                           {"correction_bins", cfg.correction.bins},
                           {"correction_accel_range", {corr.lo, corr.hi}}};

    const json sm = doc.value("simplified", json::object());
    reject_unknown(sm, {"degrees", "grid", "a_max", "positivity_margin"}, "simplified");
    auto& deg = cfg.simplified.degrees;
    const json dj = sm.value("degrees", json::object());
    reject_unknown(dj, {"C", "P", "Q", "Z", "a_c"}, "simplified.degrees");
    deg.C = get_or<int>(dj, "C", deg.C, "simplified.degrees");
    deg.P = get_or<int>(dj, "P", deg.P, "simplified.degrees");
    deg.Q = get_or<int>(dj, "Q", deg.Q, "simplified.degrees");
    deg.Z = get_or<int>(dj, "Z", deg.Z, "simplified.degrees");
    deg.a_c = get_or<int>(dj, "a_c", deg.a_c, "simplified.degrees");
    for (const int d : {deg.C, deg.P, deg.Q, deg.Z, deg.a_c}) {
        if (d < 0 || d > kMaxSimplifiedDegree) {
            throw ConfigError("simplified degrees must be in [0, " + std::to_string(kMaxSimplifiedDegree) + "]");
        }
    }
    auto& grid = cfg.simplified.grid;
    const json gj = sm.value("grid", json::object());
    reject_unknown(gj, {"v", "a", "grade", "nv", "na", "ngrade"}, "simplified.grid");
    grid.v = range_or(gj, "v", grid.v, "simplified.grid");
    grid.a = range_or(gj, "a", grid.a, "simplified.grid");
    grid.grade = range_or(gj, "grade", grid.grade, "simplified.grid");
    grid.nv = get_or<int>(gj, "nv", grid.nv, "simplified.grid");
    grid.na = get_or<int>(gj, "na", grid.na, "simplified.grid");
    grid.ngrade = get_or<int>(gj, "ngrade", grid.ngrade, "simplified.grid");
    grid.validate();
    cfg.simplified.a_max = get_or<double>(sm, "a_max", cfg.simplified.a_max, "simplified");
    cfg.simplified.positivity_margin =
        get_or<double>(sm, "positivity_margin", cfg.simplified.positivity_margin, "simplified");
    canon["simplified"] = {
        {"degrees", {{"C", deg.C}, {"P", deg.P}, {"Q", deg.Q}, {"Z", deg.Z}, {"a_c", deg.a_c}}},
        {"grid",
         {{"v", {grid.v.lo, grid.v.hi}},
          {"a", {grid.a.lo, grid.a.hi}},
          {"grade", {grid.grade.lo, grid.grade.hi}},
          {"nv", grid.nv},
          {"na", grid.na},
          {"ngrade", grid.ngrade}}},
        {"a_max", cfg.simplified.a_max},
        {"positivity_margin", cfg.simplified.positivity_margin}};

    auto& in = cfg.ingest;
    const json ij = doc.value("ingest", json::object());
    reject_unknown(ij, {"mu", "accel_bound", "max_smoothing_steps", "clip_fraction", "hot_threshold_c", "hot_window"},
                   "ingest");
    in.dt = cfg.dt;
    in.mu = get_or<double>(ij, "mu", in.mu, "ingest");
    in.accel_bound = get_or<double>(ij, "accel_bound", in.accel_bound, "ingest");
    in.max_smoothing_steps = get_or<int>(ij, "max_smoothing_steps", in.max_smoothing_steps, "ingest");
    in.clip_fraction = get_or<double>(ij, "clip_fraction", in.clip_fraction, "ingest");
    in.hot_threshold_c = get_or<double>(ij, "hot_threshold_c", in.hot_threshold_c, "ingest");
    in.hot_window = get_or<bool>(ij, "hot_window", in.hot_window, "ingest");
    if (in.mu < 0.0 || in.mu > 1.0 || in.clip_fraction < 0.0 || in.clip_fraction >= 0.5 ||
        in.max_smoothing_steps < 1 || !(in.accel_bound > 0.0)) {
        throw ConfigError("ingest settings out of range");
    }
    canon["ingest"] = {{"mu", in.mu},
                       {"accel_bound", in.accel_bound},
                       {"max_smoothing_steps", in.max_smoothing_steps},
                       {"clip_fraction", in.clip_fraction},
                       {"hot_threshold_c", in.hot_threshold_c},
                       {"hot_window", in.hot_window}};

    cfg.canonical = std::move(canon);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read config " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    json doc;
    try {
        doc = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    auto base = path.parent_path();
    if (base.empty()) {
        base = ".";
    }
    return parse_run_config(doc, base, overrides);
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

json provenance(const RunConfig& config) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(config.canonical.dump())));
    return {{"tool", kToolName}, {"version", kToolVersion}, {"config_hash", hex}};
}

std::string provenance_line(const RunConfig& config) {
    const auto p = provenance(config);
    return p.at("tool").get<std::string>() + " " + p.at("version").get<std::string>() +
           " config_hash=" + p.at("config_hash").get<std::string>();
}

}  // namespace fuelred::cli
