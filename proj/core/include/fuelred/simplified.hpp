#pragma once

#include "fuelred/reference_powertrain.hpp"
#include "fuelred/trace.hpp"

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"

namespace fuelred {

class SemiPrincipledModel;

/// Fuel rate surface to be reduced: fuel(v, a, grade) in g/s together with
/// the fuel-cut speed and idle fuel rate it was built with. Points where
/// `feasible` returns false (demand beyond the powertrain's capability) are
/// left out of the fit; an empty predicate accepts everything.
struct FuelSurface {
    std::function<double(double v, double a, double grade)> fuel;
    std::function<bool(double v, double a, double grade)> feasible;
    // Engine held at its torque floor. The fuel rate there is set by the
    // floor rather than by power demand, so these cells are not fitted; at
    // or below v_c the lower bound beta covers them.
    std::function<bool(double v, double a, double grade)> idle;
    double v_c = 0.0;
    double beta = 0.0;

    static FuelSurface from_semi(const SemiPrincipledModel& model);
};

struct SimplifiedDegrees {
    int C = 3;
    int P = 2;
    int Q = 1;
    int Z = 1;
    int a_c = 2;  // total degree in (v, grade)

    friend bool operator==(const SimplifiedDegrees&, const SimplifiedDegrees&) = default;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    friend bool operator==(const Range&, const Range&) = default;
};

/// Regular quadrature grid; every axis is split into equal cells and
/// sampled at the cell midpoints.
struct SimplifiedGrid {
    Range v{0.0, 35.0};
    Range a{-3.5, 4.0};
    Range grade{-0.05, 0.05};
    int nv = 100;
    int na = 100;
    int ngrade = 11;

    [[nodiscard]] double v_at(int i) const noexcept { return v.lo + (i + 0.5) * (v.hi - v.lo) / nv; }
    [[nodiscard]] double a_at(int i) const noexcept { return a.lo + (i + 0.5) * (a.hi - a.lo) / na; }
    [[nodiscard]] double grade_at(int i) const noexcept {
        return grade.lo + (i + 0.5) * (grade.hi - grade.lo) / ngrade;
    }

    void validate() const;

    friend bool operator==(const SimplifiedGrid&, const SimplifiedGrid&) = default;
};

struct SimplifiedFitOptions {
    SimplifiedDegrees degrees;
    SimplifiedGrid grid;
    // Shape constraints are imposed at this many speeds with this margin:
    // f_p(v, a_min(v), 0) >= margin, and above v_c the slope in a >= margin.
    // f_p(0, 0, 0) is also held at or below the source standstill rate.
    double positivity_margin = 1e-3;
    int positivity_points = 200;
    double a_max = 4.0;  // upper end of the operating acceleration range
};

struct SimplifiedDiagnostics {
    double l2_error = 0.0;   // rms of f_p - fuel over fitted cells, g/s
    double max_error = 0.0;  // max |f_p - fuel| over fitted cells, g/s
    std::size_t constraints_active = 0;  // shape constraints at their bound
    std::size_t cells_fitted = 0;
    std::size_t cut_lines = 0;

    friend bool operator==(const SimplifiedDiagnostics&, const SimplifiedDiagnostics&) = default;
};

/// f_s(v, a, grade) = max(l, C(v) + P(v) a + Q(v) a+^2 + Z(v) grade) with
/// l = beta at or below v_c, and exactly zero fuel inside the fuel-cut
/// region v > v_c, a < a_c(v, grade). Polynomial coefficients are in the
/// raw monomial basis of SI inputs (v in m/s, a in m/s^2, grade in rad).
class SimplifiedModel {
public:
    SimplifiedModel() = default;
    SimplifiedModel(double beta, double v_c, std::vector<double> C, std::vector<double> P, std::vector<double> Q,
                    std::vector<double> Z, int a_c_degree, std::vector<double> a_c, SimplifiedGrid domain,
                    double a_max = 4.0, SimplifiedDiagnostics diagnostics = {});

    /// Fuel rate, g/s. Inputs outside the fitted box are clamped and
    /// reported through *clamped.
    [[nodiscard]] double eval(double v, double a, double grade, bool* clamped = nullptr) const noexcept;

    /// The unbounded polynomial part, no clamping.
    [[nodiscard]] double f_p(double v, double a, double grade) const noexcept;

    /// Fuel-cut boundary acceleration.
    [[nodiscard]] double a_c(double v, double grade) const noexcept;

    /// Lower end of the meaningful acceleration range at flat grade: the
    /// fuel-cut boundary a_c(v, 0), kept inside [grid floor, a_max].
    [[nodiscard]] double a_min(double v) const noexcept;

    [[nodiscard]] double C(double v) const noexcept;
    [[nodiscard]] double P(double v) const noexcept;
    [[nodiscard]] double Q(double v) const noexcept;
    [[nodiscard]] double Z(double v) const noexcept;

    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] double v_c() const noexcept { return v_c_; }
    [[nodiscard]] double a_max() const noexcept { return a_max_; }
    [[nodiscard]] const std::vector<double>& C_coeffs() const noexcept { return C_; }
    [[nodiscard]] const std::vector<double>& P_coeffs() const noexcept { return P_; }
    [[nodiscard]] const std::vector<double>& Q_coeffs() const noexcept { return Q_; }
    [[nodiscard]] const std::vector<double>& Z_coeffs() const noexcept { return Z_; }
    [[nodiscard]] const std::vector<double>& a_c_coeffs() const noexcept { return a_c_; }
    [[nodiscard]] int a_c_degree() const noexcept { return a_c_degree_; }
    [[nodiscard]] const SimplifiedGrid& domain() const noexcept { return domain_; }
    [[nodiscard]] const SimplifiedDiagnostics& diagnostics() const noexcept { return diagnostics_; }

    /// Copy with the C, P, Q, Z coefficient vectors replaced.
    [[nodiscard]] SimplifiedModel with_coefficients(std::vector<double> C, std::vector<double> P,
                                                    std::vector<double> Q, std::vector<double> Z) const;

    friend bool operator==(const SimplifiedModel&, const SimplifiedModel&) = default;

private:
    double beta_ = 0.0;
    double v_c_ = 0.0;
    std::vector<double> C_, P_, Q_, Z_;
    int a_c_degree_ = 0;
    std::vector<double> a_c_;  // ordered by total degree d, then v^i grade^(d-i) for i = d..0
    SimplifiedGrid domain_;
    double a_max_ = 4.0;
    SimplifiedDiagnostics diagnostics_;
};

/// Number of monomials of total degree <= d in two variables.
[[nodiscard]] std::size_t total_degree_terms(int degree) noexcept;

/// Evaluates a total-degree polynomial in (x, y) with the a_c ordering.
[[nodiscard]] double eval_total_degree(std::span<const double> coeffs, int degree, double x, double y) noexcept;

/// L2 fit of the simplified model to a fuel surface on a regular grid.
/// Throws RankDeficient and ConstraintInfeasible.
SimplifiedModel fit_simplified(const FuelSurface& surface, const SimplifiedFitOptions& options = {});
SimplifiedModel fit_simplified(const SemiPrincipledModel& semi, const SimplifiedFitOptions& options = {});

/// Sum of squared f_p residuals over the cells the fit uses (idle,
/// fuel-cut and infeasible cells excluded), i.e. the least-squares
/// objective.
double simplified_objective(const SimplifiedModel& model, const FuelSurface& surface, const SimplifiedGrid& grid);

Trace eval_simplified_trace(const SimplifiedModel& model, std::span<const KinematicRow> rows,
                            const GradeProfile& grade = {});

void to_json(nlohmann::json& j, const SimplifiedModel& m);
void from_json(const nlohmann::json& j, SimplifiedModel& m);

void save_simplified_model(const std::filesystem::path& path, const SimplifiedModel& model,
                           const nlohmann::json& provenance = {});
SimplifiedModel load_simplified_model(const std::filesystem::path& path);

}  // namespace fuelred
