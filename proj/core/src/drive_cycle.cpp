#include "fuelred/drive_cycle.hpp"

#include "fuelred/csv.hpp"
#include "fuelred/errors.hpp"
#include "fuelred/interp.hpp"
#include "fuelred/units.hpp"

#include <cmath>
#include <fstream>

namespace fuelred {

SpeedUnit parse_speed_unit(std::string_view tag) {
    if (tag == "mps") {
        return SpeedUnit::mps;
    }
    if (tag == "kph") {
        return SpeedUnit::kph;
    }
    if (tag == "mph") {
        return SpeedUnit::mph;
    }
    throw UnitError("unknown speed unit '" + std::string(tag) + "' (expected mps, kph or mph)");
}

std::string_view to_string(SpeedUnit unit) noexcept {
    switch (unit) {
        case SpeedUnit::kph:
            return "kph";
        case SpeedUnit::mph:
            return "mph";
        case SpeedUnit::mps:
            break;
    }
    return "mps";
}

double to_mps(double value, SpeedUnit unit) noexcept {
    switch (unit) {
        case SpeedUnit::kph:
            return units::kph_to_mps(value);
        case SpeedUnit::mph:
            return units::mph_to_mps(value);
        case SpeedUnit::mps:
            break;
    }
    return value;
}

DriveCycle::DriveCycle(std::string name, std::vector<CycleSample> samples)
    : name_(std::move(name)), samples_(std::move(samples)) {
    if (samples_.size() < 2) {
        throw ParseError("cycle '" + name_ + "' needs at least 2 samples");
    }
    if (samples_.front().t != 0.0) {
        throw MonotonicityError("cycle '" + name_ + "' must start at t = 0");
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const auto& s = samples_[i];
        if (!std::isfinite(s.t) || !std::isfinite(s.v) || s.v < 0.0) {
            throw ParseError("cycle '" + name_ + "' sample " + std::to_string(i) +
                             " has a non-finite time or negative speed");
        }
        if (i > 0 && !(s.t > samples_[i - 1].t)) {
            throw MonotonicityError("cycle '" + name_ + "' time is not strictly increasing at sample " +
                                    std::to_string(i));
        }
    }
}

double DriveCycle::speed_at(double t) const noexcept {
    if (t <= samples_.front().t) {
        return samples_.front().v;
    }
    if (t >= samples_.back().t) {
        return samples_.back().v;
    }
    std::size_t lo = 0;
    std::size_t hi = samples_.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (samples_[mid].t <= t) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const auto& a = samples_[lo];
    const auto& b = samples_[hi];
    return a.v + (t - a.t) / (b.t - a.t) * (b.v - a.v);
}

std::vector<double> DriveCycle::times() const {
    std::vector<double> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) {
        out.push_back(s.t);
    }
    return out;
}

std::vector<double> DriveCycle::speeds() const {
    std::vector<double> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) {
        out.push_back(s.v);
    }
    return out;
}

DriveCycle parse_cycle(std::string_view csv_text, SpeedUnit unit, std::string name) {
    const auto table = csv::parse(csv_text);
    if (table.header.empty()) {
        throw ParseError("cycle '" + name + "' is empty");
    }
    if (table.header.size() != 2 || table.header[0] != "t" || table.header[1] != "v") {
        throw ParseError("cycle '" + name + "' must have header 't,v'");
    }
    std::vector<CycleSample> samples;
    samples.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const auto line = std::to_string(table.line_numbers[i]);
        if (row.size() != 2) {
            throw ParseError("cycle '" + name + "' line " + line + ": expected 2 fields");
        }
        const auto t = csv::to_double(row[0]);
        const auto v = csv::to_double(row[1]);
        if (!t || !v) {
            throw ParseError("cycle '" + name + "' line " + line + ": malformed number");
        }
        samples.push_back({*t, to_mps(*v, unit)});
    }
    return DriveCycle(std::move(name), std::move(samples));
}

DriveCycle load_cycle(const std::filesystem::path& path, SpeedUnit unit) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open cycle file " + path.string());
    }
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_cycle(text, unit, path.stem().string());
}

void write_cycle(const std::filesystem::path& path, const DriveCycle& cycle, SpeedUnit unit) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    const double scale = to_mps(1.0, unit);
    out << "t,v\n";
    for (const auto& s : cycle.samples()) {
        out << csv::format(s.t) << ',' << csv::format(s.v / scale) << '\n';
    }
}

DriveCycle resample(const DriveCycle& cycle, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidDt("resample step must be positive, got " + csv::format(dt));
    }
    const auto times = cycle.times();
    const auto speeds = cycle.speeds();
    const double t_end = cycle.duration();
    // Tolerance keeps t_end on the grid when it is a multiple of dt up to rounding.
    const auto steps = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
    std::vector<CycleSample> samples;
    samples.reserve(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        samples.push_back({t, interp_linear(times, speeds, t)});
    }
    if (samples.size() < 2) {
        throw InvalidDt("resample step " + csv::format(dt) + " exceeds the cycle duration");
    }
    return DriveCycle(cycle.name(), std::move(samples));
}

}  // namespace fuelred
