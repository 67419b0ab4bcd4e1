// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include "fuelred/dyno_ingest.hpp"
#include "fuelred/semi_principled.hpp"
#include "fuelred/simplified.hpp"
#include "fuelred/validation.hpp"
#include "fuelred/vehicle.hpp"
#include "support/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"

using namespace fuelred;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

struct Check {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& note) {
        pass = pass && ok;
        notes.push_back((ok ? "" : "!") + note);
    }
};

int run(const std::string& command) {
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const fs::path& path) { return json::parse(test_support::read_file(path)); }

// Relative path -> bytes for every regular file under root.
std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) {
            files[fs::relative(entry.path(), root).string()] = test_support::read_file(entry.path());
        }
    }
    return files;
}

struct PipelineRun {
    fs::path out;
    int exit_code = -1;
    double seconds = 0.0;
};

PipelineRun run_pipeline(const fs::path& config, const fs::path& out) {
    PipelineRun r;
    r.out = out;
    const auto start = Clock::now();
    r.exit_code = run(std::string(FUELRED_EXE) + " --config " + config.string() + " --out " + out.string() +
                      " pipeline > /dev/null");
    r.seconds = seconds_since(start);
    return r;
}

const json& pair_record(const json& report, const std::string& name) { return report.at("pairs").at(name); }

// 1. Simplified vs semi fuel-rate MAE per shipped cycle, and pipeline runtime.
Check pipeline_closure(const PipelineRun& run, const json& report, const std::vector<std::string>& cycles) {
    Check c;
    c.require(run.exit_code == 0, "exit " + std::to_string(run.exit_code));
    c.require(run.seconds < 30.0, "runtime " + fmt(run.seconds) + " s");
    for (const auto& cycle : cycles) {
        const double m = pair_record(report, cycle + ":simplified_vs_semi").at("mae_fuel_gps").get<double>();
        c.require(m <= 0.07, cycle + " mae " + fmt(m) + " g/s");
    }
    return c;
}

// 2. Constants extracted from the reference simulator against its configuration.
Check extraction_round_trip(const Vehicle& vehicle, const SemiPrincipledModel& semi) {
    Check c;
    const auto& k = semi.constants();
    const double idle_err = std::abs(k.f_idle - vehicle.reference.idle_fuel);
    c.require(idle_err <= 1e-6, "f_idle error " + fmt(idle_err));

    const auto& m = vehicle.shift;
    bool in_band = true;
    for (int gear = 2; gear <= vehicle.params.n_gears(); ++gear) {
        double lo = 1e300;
        double hi = -1e300;
        for (const double pedal : m.pedal_grid) {
            lo = std::min(lo, m.v_downshift(pedal, gear));
            hi = std::max(hi, m.v_upshift(pedal, gear - 1));
        }
        const double cutoff = k.K_downshift.cutoffs[gear - 1];
        in_band = in_band && cutoff >= lo && cutoff <= hi;
    }
    c.require(in_band, "downshift cutoffs in hysteresis bands");

    double worst = k.T_correction.empty() ? 1e300 : 0.0;
    for (std::size_t i = 0; i < k.T_correction.xs().size(); ++i) {
        const double injected = vehicle.reference.torque_correction(k.T_correction.xs()[i]);
        worst = std::max(worst, std::abs(k.T_correction.ys()[i] - injected));
    }
    c.require(worst <= 0.5, "T_correction max error " + fmt(worst) + " Nm");
    return c;
}

// 3. Semi-principled against the reference simulator.
Check semi_fidelity(const json& report, const std::vector<std::string>& cycles) {
    Check c;
    const double cruise = pair_record(report, "hwfet_like:semi_vs_reference").at("cumulative_error_pct").get<double>();
    const double aggressive = pair_record(report, "us06_like:semi_vs_reference").at("cumulative_error_pct").get<double>();
    c.require(cruise <= 6.0, "cruise cumulative " + fmt(cruise) + " %");
    c.require(aggressive <= 20.0, "aggressive cumulative " + fmt(aggressive) + " %");
    for (const auto& cycle : cycles) {
        const double g = pair_record(report, cycle + ":semi_vs_reference").at("gear_mismatch_pct").get<double>();
        c.require(g <= 10.0, cycle + " gear mismatch " + fmt(g) + " %");
    }
    return c;
}

// 4. Structural properties of the fitted simplified model.
Check simplified_structure(const SimplifiedModel& m) {
    Check c;
    const auto& d = m.domain();

    bool positive = true;
    for (int i = 0; i < 200; ++i) {
        const double v = d.v.lo + i * (d.v.hi - d.v.lo) / 199.0;
        positive = positive && m.f_p(v, m.a_min(v), 0.0) > 0.0;
    }
    c.require(positive, "positivity on 200 speeds");

    bool cut_zero = true;
    std::size_t cut_points = 0;
    for (int i = 1; i <= 60; ++i) {
        const double v = m.v_c() + i * (d.v.hi - m.v_c()) / 60.0;
        for (int g = 0; g < 5; ++g) {
            const double grade = d.grade.lo + g * (d.grade.hi - d.grade.lo) / 4.0;
            const double boundary = m.a_c(v, grade);
            for (int j = 0; j < 20; ++j) {
                const double a = d.a.lo + j * (boundary - d.a.lo) / 20.0;
                if (a < boundary) {
                    cut_zero = cut_zero && m.eval(v, a, grade) == 0.0;
                    ++cut_points;
                }
            }
        }
    }
    c.require(cut_zero && cut_points > 0, "fuel cut exactly 0 at " + std::to_string(cut_points) + " points");

    bool above_beta = true;
    for (int i = 0; i <= 50; ++i) {
        const double v = i * m.v_c() / 50.0;
        for (int j = 0; j <= 40; ++j) {
            const double a = d.a.lo + j * (d.a.hi - d.a.lo) / 40.0;
            for (int g = 0; g < 5; ++g) {
                const double grade = d.grade.lo + g * (d.grade.hi - d.grade.lo) / 4.0;
                above_beta = above_beta && m.eval(v, a, grade) >= m.beta();
            }
        }
    }
    c.require(above_beta, "v <= v_c at least beta");

    bool monotone = true;
    for (int i = 0; i < 100; ++i) {
        const double v = d.v.lo + i * (d.v.hi - d.v.lo) / 99.0;
        const double lo = m.a_min(v);
        double prev = m.f_p(v, lo, 0.0);
        for (int j = 1; j < 100; ++j) {
            const double next = m.f_p(v, lo + j * (m.a_max() - lo) / 99.0, 0.0);
            monotone = monotone && next >= prev;
            prev = next;
        }
    }
    c.require(monotone, "f_p non-decreasing in a on 100x100 grid");
    return c;
}

// 5. Fit against a surface of the model's own form.
Check exact_representability() {
    const std::vector<double> C{0.7, 0.035, 1.2e-3, 1.5e-5};
    const std::vector<double> P{0.3, 0.025, 3e-4};
    const std::vector<double> Q{0.05, 2e-3};
    const std::vector<double> Z{1.3, 0.12};
    const auto poly = [](const std::vector<double>& k, double v) {
        double s = 0.0;
        for (std::size_t i = k.size(); i-- > 0;) {
            s = s * v + k[i];
        }
        return s;
    };
    FuelSurface s;
    s.v_c = 2.5;
    s.beta = 0.25;
    s.fuel = [=](double v, double a, double grade) {
        if (v > 2.5 && a < -1.0 - 0.03 * v - 5.0 * grade) {
            return 0.0;
        }
        const double ap = std::max(a, 0.0);
        return poly(C, v) + poly(P, v) * a + poly(Q, v) * ap * ap + poly(Z, v) * grade;
    };
    const auto m = fit_simplified(s);
    double worst = 0.0;
    const auto compare = [&](const std::vector<double>& got, const std::vector<double>& want) {
        if (got.size() != want.size()) {
            worst = 1e300;
            return;
        }
        for (std::size_t i = 0; i < want.size(); ++i) {
            worst = std::max(worst, std::abs(got[i] - want[i]) / std::abs(want[i]));
        }
    };
    compare(m.C_coeffs(), C);
    compare(m.P_coeffs(), P);
    compare(m.Q_coeffs(), Q);
    compare(m.Z_coeffs(), Z);
    Check c;
    c.require(worst <= 1e-6, "max relative coefficient error " + fmt(worst));
    return c;
}

// 6. Dyno ingestion on the shipped synthetic logs.
Check dyno_ingestion(const std::vector<fs::path>& logs) {
    Check c;
    c.require(!logs.empty(), std::to_string(logs.size()) + " logs");
    for (const auto& path : logs) {
        const auto start = Clock::now();
        const auto profile = ingest_dyno_log(load_dyno_log(path));
        const double secs = seconds_since(start);
        const auto& p = profile.provenance;
        double max_a = 0.0;
        for (const auto& r : profile.rows) {
            max_a = std::max(max_a, std::abs(r.a));
        }
        const double slope_err = std::abs(p.slope - 0.0398) / 0.0398;
        const auto name = path.stem().string();
        c.require(slope_err <= 0.005, name + " slope error " + fmt(100.0 * slope_err) + " %");
        c.require(p.raw_max_abs_accel > 20.0, name + " raw max|a| " + fmt(p.raw_max_abs_accel));
        c.require(p.within_bound && p.smoothed_max_abs_accel <= 4.0 && max_a <= 4.0,
                  name + " smoothed max|a| " + fmt(p.smoothed_max_abs_accel) + " after " +
                      std::to_string(p.smoothing_steps) + " passes");
        c.require(secs < 5.0, name + " " + fmt(secs) + " s");
    }
    return c;
}

// 7. Validation metrics against straight loops.
Check metric_oracle() {
    Check c;
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> fuel(0.0, 8.0), speed(80.0, 650.0), torque(-30.0, 350.0),
        pedal(0.0, 100.0);
    std::uniform_int_distribution<int> gear(1, 6);
    const auto random_trace = [&] {
        Trace t;
        for (int i = 0; i < 1000; ++i) {
            TraceRow r;
            r.t = 0.1 * i;
            r.fuel = fuel(rng);
            r.engine_speed = speed(rng);
            r.engine_torque = torque(rng);
            r.pedal = pedal(rng);
            r.gear = gear(rng);
            t.rows.push_back(r);
        }
        return t;
    };
    double worst = 0.0;
    const auto rel = [&](double got, double want) {
        const double e = want == 0.0 ? std::abs(got) : std::abs(got - want) / std::abs(want);
        worst = std::max(worst, e);
    };
    for (int trial = 0; trial < 20; ++trial) {
        const auto ref = random_trace();
        const auto model = random_trace();
        const auto m = compare(align(ref, model, 0.1), 0.1);

        double s_fuel = 0.0, s_rpm = 0.0, s_torque = 0.0, s_pedal = 0.0, s_gear = 0.0;
        double f_ref = 0.0, f_model = 0.0;
        int mismatched = 0;
        for (int i = 0; i < 1000; ++i) {
            const auto& a = ref.rows[i];
            const auto& b = model.rows[i];
            s_fuel += std::abs(a.fuel - b.fuel);
            s_rpm += std::abs(a.engine_speed - b.engine_speed) * 60.0 / (2.0 * 3.14159265358979323846);
            s_torque += std::abs(a.engine_torque - b.engine_torque);
            s_pedal += std::abs(a.pedal - b.pedal);
            s_gear += std::abs(a.gear - b.gear);
            if (a.gear != b.gear) {
                ++mismatched;
            }
            if (i > 0) {
                const double h = ref.rows[i].t - ref.rows[i - 1].t;
                f_ref += h * (a.fuel + ref.rows[i - 1].fuel) / 2.0;
                f_model += h * (b.fuel + model.rows[i - 1].fuel) / 2.0;
            }
        }
        rel(m.mae_fuel, s_fuel / 1000.0);
        rel(*m.mae_engine_speed, s_rpm / 1000.0);
        rel(*m.mae_engine_torque, s_torque / 1000.0);
        rel(*m.mae_pedal, s_pedal / 1000.0);
        rel(*m.mae_gear, s_gear / 1000.0);
        rel(*m.gear_mismatch_pct, mismatched / 10.0);
        rel(m.cumulative_fuel_ref, f_ref);
        rel(m.cumulative_fuel_model, f_model);
        rel(m.cumulative_error_pct, 100.0 * std::abs(f_model - f_ref) / f_ref);
        if (m.steps != 1000) {
            c.require(false, "aligned length " + std::to_string(m.steps));
        }
    }
    c.require(worst <= 1e-12, "max relative deviation " + fmt(worst) + " over 20 traces");
    return c;
}

// 8. Two pipeline runs with the same config.
Check determinism(const PipelineRun& first, const PipelineRun& second) {
    Check c;
    c.require(first.exit_code == 0 && second.exit_code == 0, "both runs exit 0");
    const auto a = snapshot(first.out);
    const auto b = snapshot(second.out);
    std::size_t differing = a.size() == b.size() ? 0 : 1;
    for (const auto& [name, bytes] : a) {
        const auto it = b.find(name);
        differing += it == b.end() || it->second != bytes ? 1 : 0;
    }
    c.require(!a.empty() && differing == 0,
              std::to_string(a.size()) + " artifacts, " + std::to_string(differing) + " differ");
    return c;
}

void report(int index, const std::string& title, const Check& c, int& failures) {
    std::string detail;
    for (const auto& n : c.notes) {
        detail += (detail.empty() ? "" : "; ") + n;
    }
    std::cout << (c.pass ? "PASS" : "FAIL") << " criterion " << index << " " << title << ": " << detail << std::endl;
    failures += c.pass ? 0 : 1;
}

Check guarded(const std::function<Check()>& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        Check c;
        c.require(false, std::string("error: ") + e.what());
        return c;
    }
}

}  // namespace

int main() {
    test_support::TempDir dir("acceptance");
    fs::path data = FUELRED_DATA_DIR;
    if (!fs::exists(data / "config.json")) {
        data = dir.path() / "data";
        run(std::string(FUELRED_MAKE_DATA_EXE) + " --out " + data.string() + " > /dev/null");
    }
    const auto config_path = data / "config.json";
    const auto config = read_json(config_path);
    std::vector<std::string> cycles;
    for (const auto& c : config.at("cycles")) {
        cycles.push_back(fs::path(c.get<std::string>()).stem().string());
    }
    std::vector<fs::path> dyno_logs;
    for (const auto& d : config.value("dyno_logs", json::array())) {
        dyno_logs.push_back(data / d.get<std::string>());
    }

    const auto first = run_pipeline(config_path, dir.path() / "run1");
    json report_doc = json::object();
    std::optional<SemiPrincipledModel> semi;
    SimplifiedModel simplified;
    Vehicle vehicle;
    bool artifacts = first.exit_code == 0;
    if (artifacts) {
        try {
            report_doc = read_json(first.out / "report" / "report.json");
            semi.emplace(load_semi_model(first.out / "semi_model.json"));
            simplified = load_simplified_model(first.out / "simplified_model.json");
            vehicle = load_vehicle(data / config.at("vehicle").get<std::string>());
        } catch (const std::exception& e) {
            std::cerr << "cannot read pipeline artifacts: " << e.what() << '\n';
            artifacts = false;
        }
    }
    const auto need_artifacts = [&](const std::function<Check()>& body) {
        return guarded([&] {
            if (!artifacts) {
                Check c;
                c.require(false, "pipeline artifacts unavailable");
                return c;
            }
            return body();
        });
    };

    int failures = 0;
    report(1, "pipeline closure", need_artifacts([&] { return pipeline_closure(first, report_doc, cycles); }),
           failures);
    report(2, "extraction round-trip", need_artifacts([&] { return extraction_round_trip(vehicle, *semi); }),
           failures);
    report(3, "semi-principled fidelity", need_artifacts([&] { return semi_fidelity(report_doc, cycles); }),
           failures);
    report(4, "simplified structure", need_artifacts([&] { return simplified_structure(simplified); }), failures);
    report(5, "exact representability", guarded(exact_representability), failures);
    report(6, "dyno ingestion", guarded([&] { return dyno_ingestion(dyno_logs); }), failures);
    report(7, "metric oracle equivalence", guarded(metric_oracle), failures);
    const auto second = run_pipeline(config_path, dir.path() / "run2");
    report(8, "determinism", guarded([&] { return determinism(first, second); }), failures);
    return failures == 0 ? 0 : 1;
}
