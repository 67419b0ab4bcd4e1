#include "fuelred/simplified.hpp"

#include "fuelred/errors.hpp"
#include "fuelred/poly.hpp"
#include "fuelred/semi_principled.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace fuelred {

using json = nlohmann::json;

namespace {

constexpr int kBisectionSteps = 50;

double positive_part(double a) noexcept { return a > 0.0 ? a : 0.0; }

void require_degree(int degree, const char* name) {
    if (degree < 0) {
        throw ConfigError(std::string("simplified model degree of ") + name + " must be non-negative");
    }
}

void check_coeffs(const std::vector<double>& c, const char* name) {
    if (c.empty()) {
        throw ConfigError(std::string("simplified model needs at least one coefficient for ") + name);
    }
}

}  // namespace

FuelSurface FuelSurface::from_semi(const SemiPrincipledModel& model) {
    FuelSurface s;
    s.fuel = [model](double v, double a, double grade) { return model.eval(v, a, grade).fuel; };
    s.feasible = [model](double v, double a, double grade) { return !model.eval(v, a, grade).saturated; };
    s.idle = [model](double v, double a, double grade) {
        return model.eval(v, a, grade).engine_torque <= model.constants().T_min;
    };
    s.v_c = model.constants().v_c;
    s.beta = model.constants().f_idle;
    return s;
}

void SimplifiedGrid::validate() const {
    if (!(v.hi > v.lo) || !(a.hi > a.lo) || !(grade.hi >= grade.lo)) {
        throw ConfigError("simplified grid ranges must be non-empty");
    }
    if (v.lo < 0.0) {
        throw ConfigError("simplified grid speed range must be non-negative");
    }
    if (nv < 10 || na < 10 || ngrade < 1) {
        throw ConfigError("simplified grid needs >= 10 cells on the speed and acceleration axes");
    }
}

std::size_t total_degree_terms(int degree) noexcept {
    const auto d = static_cast<std::size_t>(std::max(degree, 0));
    return (d + 1) * (d + 2) / 2;
}

double eval_total_degree(std::span<const double> coeffs, int degree, double x, double y) noexcept {
    double sum = 0.0;
    std::size_t idx = 0;
    for (int d = 0; d <= degree; ++d) {
        for (int i = d; i >= 0; --i) {
            if (idx < coeffs.size()) {
                sum += coeffs[idx] * std::pow(x, i) * std::pow(y, d - i);
            }
            ++idx;
        }
    }
    return sum;
}

SimplifiedModel::SimplifiedModel(double beta, double v_c, std::vector<double> C, std::vector<double> P,
                                 std::vector<double> Q, std::vector<double> Z, int a_c_degree,
                                 std::vector<double> a_c, SimplifiedGrid domain, double a_max,
                                 SimplifiedDiagnostics diagnostics)
    : beta_(beta),
      v_c_(v_c),
      C_(std::move(C)),
      P_(std::move(P)),
      Q_(std::move(Q)),
      Z_(std::move(Z)),
      a_c_degree_(a_c_degree),
      a_c_(std::move(a_c)),
      domain_(domain),
      a_max_(a_max),
      diagnostics_(diagnostics) {
    if (!(beta_ > 0.0) || !(v_c_ > 0.0)) {
        throw ConfigError("simplified model needs beta > 0 and v_c > 0");
    }
    check_coeffs(C_, "C");
    check_coeffs(P_, "P");
    check_coeffs(Q_, "Q");
    check_coeffs(Z_, "Z");
    require_degree(a_c_degree_, "a_c");
    if (a_c_.size() != total_degree_terms(a_c_degree_)) {
        throw ConfigError("a_c coefficient count does not match its total degree");
    }
    domain_.validate();
}

double SimplifiedModel::C(double v) const noexcept { return polyval(C_, v); }
double SimplifiedModel::P(double v) const noexcept { return polyval(P_, v); }
double SimplifiedModel::Q(double v) const noexcept { return polyval(Q_, v); }
double SimplifiedModel::Z(double v) const noexcept { return polyval(Z_, v); }

double SimplifiedModel::f_p(double v, double a, double grade) const noexcept {
    const double ap = positive_part(a);
    return C(v) + P(v) * a + Q(v) * ap * ap + Z(v) * grade;
}

double SimplifiedModel::a_c(double v, double grade) const noexcept {
    return eval_total_degree(a_c_, a_c_degree_, v, grade);
}

double SimplifiedModel::a_min(double v) const noexcept {
    return std::clamp(a_c(v, 0.0), domain_.a.lo, a_max_);
}

double SimplifiedModel::eval(double v, double a, double grade, bool* clamped) const noexcept {
    const double vc = std::clamp(v, domain_.v.lo, domain_.v.hi);
    const double ac = std::clamp(a, domain_.a.lo, domain_.a.hi);
    const double gc = std::clamp(grade, domain_.grade.lo, domain_.grade.hi);
    if (clamped != nullptr) {
        *clamped = vc != v || ac != a || gc != grade;
    }
    const double fp = f_p(vc, ac, gc);
    if (vc <= v_c_) {
        return std::max(beta_, fp);
    }
    if (ac < a_c(vc, gc)) {
        return 0.0;
    }
    return std::max(0.0, fp);
}

SimplifiedModel SimplifiedModel::with_coefficients(std::vector<double> C, std::vector<double> P,
                                                   std::vector<double> Q, std::vector<double> Z) const {
    SimplifiedModel copy = *this;
    copy.C_ = std::move(C);
    copy.P_ = std::move(P);
    copy.Q_ = std::move(Q);
    copy.Z_ = std::move(Z);
    return copy;
}

namespace {

// Standstill, infeasible, idle and fuel-cut cells stay out of the fit.
bool fitted_cell(const FuelSurface& surface, double v, double a, double grade, double fuel) {
    if (v < kStandstillSpeed || (surface.feasible && !surface.feasible(v, a, grade))) {
        return false;
    }
    if (v > surface.v_c && fuel == 0.0) {
        return false;
    }
    return !(surface.idle && surface.idle(v, a, grade));
}

struct GridSamples {
    const SimplifiedGrid& grid;
    std::vector<double> fuel;  // [iv][ig][ia]
    std::vector<char> used;  // cell enters the least-squares fit

    [[nodiscard]] std::size_t index(int iv, int ig, int ia) const {
        return (static_cast<std::size_t>(iv) * grid.ngrade + ig) * grid.na + ia;
    }
    [[nodiscard]] double at(int iv, int ig, int ia) const { return fuel[index(iv, ig, ia)]; }
    [[nodiscard]] bool ok(int iv, int ig, int ia) const { return used[index(iv, ig, ia)] != 0; }
};

GridSamples sample_surface(const FuelSurface& surface, const SimplifiedGrid& grid) {
    GridSamples s{grid, {}, {}};
    const auto cells = static_cast<std::size_t>(grid.nv) * grid.ngrade * grid.na;
    s.fuel.reserve(cells);
    s.used.reserve(cells);
    for (int iv = 0; iv < grid.nv; ++iv) {
        for (int ig = 0; ig < grid.ngrade; ++ig) {
            for (int ia = 0; ia < grid.na; ++ia) {
                const double v = grid.v_at(iv);
                const double a = grid.a_at(ia);
                const double grade = grid.grade_at(ig);
                s.fuel.push_back(surface.fuel(v, a, grade));
                s.used.push_back(fitted_cell(surface, v, a, grade, s.fuel.back()) ? 1 : 0);
            }
        }
    }
    return s;
}

// Largest zero-fuel acceleration on each (v, grade) line above v_c, refined
// by bisection towards the first fuelled grid point after it.
std::vector<double> fit_cut_boundary(const FuelSurface& surface, const GridSamples& s, int degree,
                                     std::size_t* lines) {
    const auto& grid = s.grid;
    std::vector<double> vs, gs, as;
    for (int iv = 0; iv < grid.nv; ++iv) {
        const double v = grid.v_at(iv);
        if (v <= surface.v_c) {
            continue;
        }
        for (int ig = 0; ig < grid.ngrade; ++ig) {
            int last_zero = -1;
            for (int ia = 0; ia < grid.na; ++ia) {
                if (s.at(iv, ig, ia) == 0.0) {
                    last_zero = ia;
                }
            }
            if (last_zero < 0) {
                continue;
            }
            const double grade = grid.grade_at(ig);
            double lo = grid.a_at(last_zero);
            double boundary = lo;
            if (last_zero + 1 < grid.na) {
                double hi = grid.a_at(last_zero + 1);
                for (int it = 0; it < kBisectionSteps; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (surface.fuel(v, mid, grade) == 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                boundary = 0.5 * (lo + hi);
            }
            vs.push_back(v);
            gs.push_back(grade);
            as.push_back(boundary);
        }
    }
    *lines = as.size();
    const std::size_t terms = total_degree_terms(degree);
    std::vector<double> coeffs(terms, 0.0);
    if (as.empty()) {
        // No fuel cut anywhere on the grid: the region is empty.
        coeffs[0] = grid.a.lo;
        return coeffs;
    }
    std::vector<double> design;
    design.reserve(as.size() * terms);
    for (int d = 0; d <= degree; ++d) {
        for (int i = d; i >= 0; --i) {
            for (std::size_t r = 0; r < as.size(); ++r) {
                design.push_back(std::pow(vs[r], i) * std::pow(gs[r], d - i));
            }
        }
    }
    return solve_least_squares(design, as.size(), terms, as);
}

}  // namespace

SimplifiedModel fit_simplified(const FuelSurface& surface, const SimplifiedFitOptions& options) {
    const auto& grid = options.grid;
    const auto& deg = options.degrees;
    grid.validate();
    require_degree(deg.C, "C");
    require_degree(deg.P, "P");
    require_degree(deg.Q, "Q");
    require_degree(deg.Z, "Z");
    require_degree(deg.a_c, "a_c");
    if (!surface.fuel) {
        throw ConfigError("fuel surface has no evaluation function");
    }

    const auto samples = sample_surface(surface, grid);

    SimplifiedDiagnostics diag;
    const auto a_c = fit_cut_boundary(surface, samples, deg.a_c, &diag.cut_lines);

    const std::size_t nc = static_cast<std::size_t>(deg.C) + 1;
    const std::size_t np = static_cast<std::size_t>(deg.P) + 1;
    const std::size_t nq = static_cast<std::size_t>(deg.Q) + 1;
    const std::size_t nz = static_cast<std::size_t>(deg.Z) + 1;
    const std::size_t cols = nc + np + nq + nz;

    std::vector<double> rhs;
    std::vector<std::vector<double>> columns(cols);
    for (int iv = 0; iv < grid.nv; ++iv) {
        const double v = grid.v_at(iv);
        for (int ig = 0; ig < grid.ngrade; ++ig) {
            const double grade = grid.grade_at(ig);
            for (int ia = 0; ia < grid.na; ++ia) {
                const double fuel = samples.at(iv, ig, ia);
                if (!samples.ok(iv, ig, ia)) {
                    continue;
                }
                const double a = grid.a_at(ia);
                const double ap = positive_part(a);
                double vp = 1.0;
                for (std::size_t i = 0; i < std::max({nc, np, nq, nz}); ++i) {
                    if (i < nc) columns[i].push_back(vp);
                    if (i < np) columns[nc + i].push_back(vp * a);
                    if (i < nq) columns[nc + np + i].push_back(vp * ap * ap);
                    if (i < nz) columns[nc + np + nq + i].push_back(vp * grade);
                    vp *= v;
                }
                rhs.push_back(fuel);
            }
        }
    }
    if (rhs.size() < cols) {
        throw RankDeficient("only " + std::to_string(rhs.size()) + " grid cells available for " +
                            std::to_string(cols) + " coefficients");
    }
    std::vector<double> design;
    design.reserve(rhs.size() * cols);
    for (const auto& col : columns) {
        design.insert(design.end(), col.begin(), col.end());
    }
    const std::size_t fit_rows = rhs.size();
    const auto basis = [&](double v, double a, double grade) {
        std::vector<double> row(cols);
        const double ap = positive_part(a);
        double vp = 1.0;
        for (std::size_t i = 0; i < std::max({nc, np, nq, nz}); ++i) {
            if (i < nc) row[i] = vp;
            if (i < np) row[nc + i] = vp * a;
            if (i < nq) row[nc + np + i] = vp * ap * ap;
            if (i < nz) row[nc + np + nq + i] = vp * grade;
            vp *= v;
        }
        return row;
    };
    const auto split = [&](const std::vector<double>& x) {
        const auto at = [&](std::size_t i) { return x.begin() + static_cast<std::ptrdiff_t>(i); };
        return SimplifiedModel(surface.beta, surface.v_c, std::vector<double>(at(0), at(nc)),
                               std::vector<double>(at(nc), at(nc + np)),
                               std::vector<double>(at(nc + np), at(nc + np + nq)),
                               std::vector<double>(at(nc + np + nq), x.end()), deg.a_c, a_c, grid,
                               options.a_max);
    };

    const SimplifiedModel unconstrained = split(solve_least_squares(design, fit_rows, cols, rhs));

    // Shape constraints on a dense speed grid at flat grade: f_p(v, a_min(v))
    // above zero and, above v_c where f_p is not masked by the idle floor,
    // the slope in a non-negative at both ends of [a_min(v), a_max]. The
    // slope P + 2 Q a+ is constant for a < 0 and linear above, so its ends
    // bound it over the whole interval. a_min comes from the a_c fit and does
    // not depend on these coefficients.
    const int n = std::max(options.positivity_points, 2);
    const auto slope_row = [&](double v, double a) {
        std::vector<double> row(cols, 0.0);
        const double ap = positive_part(a);
        double vp = 1.0;
        for (std::size_t i = 0; i < std::max(np, nq); ++i) {
            if (i < np) row[nc + i] = vp;
            if (i < nq) row[nc + np + i] = 2.0 * vp * ap;
            vp *= v;
        }
        return row;
    };
    std::vector<double> g;
    for (int i = 0; i < n; ++i) {
        const double v = grid.v.lo + i * (grid.v.hi - grid.v.lo) / (n - 1);
        const double a_lo = unconstrained.a_min(v);
        auto rows = std::vector<std::vector<double>>{basis(v, a_lo, 0.0)};
        if (v > surface.v_c) {
            rows.push_back(slope_row(v, a_lo));
            rows.push_back(slope_row(v, unconstrained.a_max()));
        }
        for (const auto& r : rows) {
            g.insert(g.end(), r.begin(), r.end());
        }
    }
    std::vector<double> h(g.size() / cols, options.positivity_margin);
    // At standstill the fitted rate may not exceed the source's own
    // standstill rate, so a stopped vehicle reads beta when the source idles.
    const auto standstill = basis(0.0, 0.0, 0.0);
    for (const double b : standstill) {
        g.push_back(-b);
    }
    h.push_back(-std::max(surface.beta, surface.fuel(0.0, 0.0, 0.0)));
    const auto x = solve_constrained_least_squares(design, fit_rows, cols, rhs, g, h);
    for (std::size_t j = 0; j < h.size(); ++j) {
        double value = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            value += g[j * cols + c] * x[c];
        }
        diag.constraints_active += value - h[j] < 1e-9 ? 1 : 0;
    }
    const SimplifiedModel model = split(x);

    // Residual diagnostics with the final coefficients.
    const SimplifiedModel& draft = model;
    double ss = 0.0;
    for (int iv = 0; iv < grid.nv; ++iv) {
        const double v = grid.v_at(iv);
        for (int ig = 0; ig < grid.ngrade; ++ig) {
            for (int ia = 0; ia < grid.na; ++ia) {
                const double fuel = samples.at(iv, ig, ia);
                if (!samples.ok(iv, ig, ia)) {
                    continue;
                }
                const double r = draft.f_p(v, grid.a_at(ia), grid.grade_at(ig)) - fuel;
                ss += r * r;
                diag.max_error = std::max(diag.max_error, std::abs(r));
                ++diag.cells_fitted;
            }
        }
    }
    diag.l2_error = std::sqrt(ss / static_cast<double>(diag.cells_fitted));
    return SimplifiedModel(surface.beta, surface.v_c, model.C_coeffs(), model.P_coeffs(), model.Q_coeffs(),
                           model.Z_coeffs(), deg.a_c, a_c, grid, options.a_max, diag);
}

SimplifiedModel fit_simplified(const SemiPrincipledModel& semi, const SimplifiedFitOptions& options) {
    return fit_simplified(FuelSurface::from_semi(semi), options);
}

double simplified_objective(const SimplifiedModel& model, const FuelSurface& surface, const SimplifiedGrid& grid) {
    double ss = 0.0;
    for (int iv = 0; iv < grid.nv; ++iv) {
        const double v = grid.v_at(iv);
        for (int ig = 0; ig < grid.ngrade; ++ig) {
            const double grade = grid.grade_at(ig);
            for (int ia = 0; ia < grid.na; ++ia) {
                const double a = grid.a_at(ia);
                const double fuel = surface.fuel(v, a, grade);
                if (!fitted_cell(surface, v, a, grade, fuel)) {
                    continue;
                }
                const double r = model.f_p(v, a, grade) - fuel;
                ss += r * r;
            }
        }
    }
    return ss;
}

Trace eval_simplified_trace(const SimplifiedModel& model, std::span<const KinematicRow> rows,
                            const GradeProfile& grade) {
    Trace trace;
    trace.has_dynamics = false;
    trace.rows.reserve(rows.size());
    for (const auto& in : rows) {
        TraceRow row;
        row.t = in.t;
        row.v = in.v;
        row.a = in.a;
        row.grade = grade ? grade(in.t) : 0.0;
        bool clamped = false;
        row.fuel = model.eval(row.v, row.a, row.grade, &clamped);
        row.flag = clamped;
        row.gear = 0;
        trace.rows.push_back(row);
    }
    return trace;
}

void to_json(json& j, const SimplifiedModel& m) {
    const auto& d = m.domain();
    const auto& diag = m.diagnostics();
    j = json{
        {"beta_gps", m.beta()},
        {"v_c_mps", m.v_c()},
        {"degrees",
         {{"C", m.C_coeffs().size() - 1},
          {"P", m.P_coeffs().size() - 1},
          {"Q", m.Q_coeffs().size() - 1},
          {"Z", m.Z_coeffs().size() - 1},
          {"a_c", m.a_c_degree()}}},
        {"C", m.C_coeffs()},
        {"P", m.P_coeffs()},
        {"Q", m.Q_coeffs()},
        {"Z", m.Z_coeffs()},
        {"a_c", m.a_c_coeffs()},
        {"a_max_mps2", m.a_max()},
        {"domain",
         {{"v_mps", {d.v.lo, d.v.hi}},
          {"a_mps2", {d.a.lo, d.a.hi}},
          {"grade_rad", {d.grade.lo, d.grade.hi}},
          {"resolution", {d.nv, d.na, d.ngrade}}}},
        {"diagnostics",
         {{"l2_error_gps", diag.l2_error},
          {"max_error_gps", diag.max_error},
          {"constraints_active", diag.constraints_active},
          {"cells_fitted", diag.cells_fitted},
          {"cut_lines", diag.cut_lines}}},
    };
}

void from_json(const json& j, SimplifiedModel& m) {
    SimplifiedGrid grid;
    const auto& d = j.at("domain");
    grid.v = {d.at("v_mps").at(0).get<double>(), d.at("v_mps").at(1).get<double>()};
    grid.a = {d.at("a_mps2").at(0).get<double>(), d.at("a_mps2").at(1).get<double>()};
    grid.grade = {d.at("grade_rad").at(0).get<double>(), d.at("grade_rad").at(1).get<double>()};
    grid.nv = d.at("resolution").at(0).get<int>();
    grid.na = d.at("resolution").at(1).get<int>();
    grid.ngrade = d.at("resolution").at(2).get<int>();
    SimplifiedDiagnostics diag;
    if (j.contains("diagnostics")) {
        const auto& jd = j.at("diagnostics");
        jd.at("l2_error_gps").get_to(diag.l2_error);
        jd.at("max_error_gps").get_to(diag.max_error);
        jd.at("constraints_active").get_to(diag.constraints_active);
        jd.at("cells_fitted").get_to(diag.cells_fitted);
        jd.at("cut_lines").get_to(diag.cut_lines);
    }
    m = SimplifiedModel(j.at("beta_gps").get<double>(), j.at("v_c_mps").get<double>(),
                        j.at("C").get<std::vector<double>>(), j.at("P").get<std::vector<double>>(),
                        j.at("Q").get<std::vector<double>>(), j.at("Z").get<std::vector<double>>(),
                        j.at("degrees").at("a_c").get<int>(), j.at("a_c").get<std::vector<double>>(), grid,
                        j.at("a_max_mps2").get<double>(), diag);
}

void save_simplified_model(const std::filesystem::path& path, const SimplifiedModel& model,
                           const json& provenance) {
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

SimplifiedModel load_simplified_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open simplified model " + path.string());
    }
    try {
        return json::parse(in).get<SimplifiedModel>();
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace fuelred
