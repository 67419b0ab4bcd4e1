#include "fuelred/trace.hpp"

#include "fuelred/csv.hpp"
#include "fuelred/errors.hpp"

#include <fstream>

namespace fuelred {

namespace {

constexpr const char* kFullHeader =
    "t,v_mps,a_mps2,grade_rad,gear,engine_speed_radps,engine_torque_nm,pedal_pct,fuel_gps,flag";
constexpr const char* kFuelOnlyHeader = "t,v_mps,a_mps2,grade_rad,fuel_gps,flag";

}  // namespace

std::vector<double> Trace::times() const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(r.t);
    }
    return out;
}

std::vector<double> Trace::fuel() const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(r.fuel);
    }
    return out;
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace, const std::string& comment) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    if (!comment.empty()) {
        out << "# " << comment << '\n';
    }
    out << (trace.has_dynamics ? kFullHeader : kFuelOnlyHeader) << '\n';
    for (const auto& r : trace.rows) {
        out << csv::format(r.t) << ',' << csv::format(r.v) << ',' << csv::format(r.a) << ','
            << csv::format(r.grade) << ',';
        if (trace.has_dynamics) {
            out << r.gear << ',' << csv::format(r.engine_speed) << ',' << csv::format(r.engine_torque)
                << ',' << csv::format(r.pedal) << ',';
        }
        out << csv::format(r.fuel) << ',' << (r.flag ? 1 : 0) << '\n';
    }
}

Trace read_trace_csv(const std::filesystem::path& path) {
    const auto table = csv::read_file(path);
    Trace trace;
    trace.name = path.stem().string();
    const auto joined = [&] {
        std::string h;
        for (std::size_t i = 0; i < table.header.size(); ++i) {
            h += (i ? "," : "") + table.header[i];
        }
        return h;
    }();
    if (joined == kFullHeader) {
        trace.has_dynamics = true;
    } else if (joined == kFuelOnlyHeader) {
        trace.has_dynamics = false;
    } else {
        throw ParseError(path.string() + ": unrecognized trace header '" + joined + "'");
    }
    const std::size_t width = table.header.size();
    trace.rows.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& f = table.rows[i];
        const auto where = path.string() + " line " + std::to_string(table.line_numbers[i]);
        if (f.size() != width) {
            throw ParseError(where + ": expected " + std::to_string(width) + " fields");
        }
        auto num = [&](std::size_t col) {
            const auto v = csv::to_double(f[col]);
            if (!v) {
                throw ParseError(where + ": malformed number in column " + table.header[col]);
            }
            return *v;
        };
        TraceRow r;
        r.t = num(0);
        r.v = num(1);
        r.a = num(2);
        r.grade = num(3);
        std::size_t col = 4;
        if (trace.has_dynamics) {
            const auto gear = csv::to_long(f[4]);
            if (!gear) {
                throw ParseError(where + ": malformed gear");
            }
            r.gear = static_cast<int>(*gear);
            r.engine_speed = num(5);
            r.engine_torque = num(6);
            r.pedal = num(7);
            col = 8;
        }
        r.fuel = num(col);
        r.flag = num(col + 1) != 0.0;
        trace.rows.push_back(r);
    }
    return trace;
}

}  // namespace fuelred

#include "fuelred/drive_cycle.hpp"
#include "fuelred/interp.hpp"

namespace fuelred {

std::vector<KinematicRow> kinematics_from_cycle(const DriveCycle& cycle, double dt) {
    const auto grid = resample(cycle, dt);
    const auto speeds = grid.speeds();
    const auto accels = finite_difference(speeds, dt);
    std::vector<KinematicRow> rows(speeds.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i] = {grid.samples()[i].t, speeds[i], accels[i]};
    }
    return rows;
}

std::vector<KinematicRow> kinematics_from_trace(const Trace& trace) {
    std::vector<KinematicRow> rows;
    rows.reserve(trace.rows.size());
    for (const auto& r : trace.rows) {
        rows.push_back({r.t, r.v, r.a});
    }
    return rows;
}

}  // namespace fuelred
