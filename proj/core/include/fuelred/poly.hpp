#pragma once

#include <span>
#include <vector>

#include "json.hpp"

namespace fuelred {

struct PolyDegree {
    int x = 1;
    int y = 1;

    [[nodiscard]] int total() const noexcept { return x + y; }
    friend bool operator==(const PolyDegree&, const PolyDegree&) = default;
};

struct Standardization {
    double mean = 0.0;
    double scale = 1.0;

    [[nodiscard]] double apply(double value) const noexcept { return (value - mean) / scale; }
    friend bool operator==(const Standardization&, const Standardization&) = default;
};

struct Box2D {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;

    [[nodiscard]] bool contains(double x, double y) const noexcept {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
    friend bool operator==(const Box2D&, const Box2D&) = default;
};

/// Tensor-product polynomial z = sum c_ij x'^i y'^j in standardized inputs
/// x' = (x - mean_x)/scale_x, y' likewise. Storing the standardization with
/// the coefficients makes evaluation reproduce the fit exactly.
class PolyMap2D {
public:
    PolyMap2D() = default;
    PolyMap2D(PolyDegree degree, std::vector<double> coeffs, Standardization sx, Standardization sy, Box2D domain);

    [[nodiscard]] double operator()(double x, double y) const noexcept;

    // Evaluates after clamping (x, y) into the fitted domain; sets *clamped
    // when the input was outside.
    [[nodiscard]] double eval_clamped(double x, double y, bool* clamped = nullptr) const noexcept;

    /// Coefficients in the raw monomial basis x^i y^j, row-major
    /// (degree.x + 1) x (degree.y + 1).
    [[nodiscard]] std::vector<double> raw_coefficients() const;

    [[nodiscard]] const PolyDegree& degree() const noexcept { return degree_; }
    [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return coeffs_; }
    [[nodiscard]] const Standardization& x_standardization() const noexcept { return sx_; }
    [[nodiscard]] const Standardization& y_standardization() const noexcept { return sy_; }
    [[nodiscard]] const Box2D& domain() const noexcept { return domain_; }

    friend bool operator==(const PolyMap2D&, const PolyMap2D&) = default;

private:
    PolyDegree degree_{};
    std::vector<double> coeffs_;
    Standardization sx_;
    Standardization sy_;
    Box2D domain_;
};

struct PolyFitOptions {
    int max_total_degree = 4;
};

struct PolyFit {
    PolyMap2D map;
    double rms_residual = 0.0;
    std::size_t samples = 0;
};

/// Ordinary least squares on the tensor monomial basis. Throws
/// DegreeTooHigh, RankDeficient (including fewer samples than
/// coefficients) and std::invalid_argument for mismatched or non-finite
/// input.
PolyFit fit_poly2d(std::span<const double> xs, std::span<const double> ys, std::span<const double> zs,
                   PolyDegree degree, const PolyFitOptions& options = {});

/// Dense least-squares helper shared by the fitters: solves min |A c - b|
/// for a column-major design matrix with `cols` columns. Throws
/// RankDeficient when A has numerically dependent columns.
std::vector<double> solve_least_squares(std::span<const double> design_col_major, std::size_t rows,
                                        std::size_t cols, std::span<const double> rhs);

/// Inequality-constrained least squares: min |A c - b| subject to G c >= h,
/// with G row-major (one row of `cols` entries per constraint). Throws
/// RankDeficient like solve_least_squares and ConstraintInfeasible when no
/// c satisfies every constraint.
std::vector<double> solve_constrained_least_squares(std::span<const double> design_col_major, std::size_t rows,
                                                    std::size_t cols, std::span<const double> rhs,
                                                    std::span<const double> constraints_row_major,
                                                    std::span<const double> bounds);

/// Raw-coefficient polynomial c0 + c1 x + ... evaluated by Horner's rule.
double polyval(std::span<const double> coeffs, double x) noexcept;

void to_json(nlohmann::json& j, const PolyMap2D& m);
void from_json(const nlohmann::json& j, PolyMap2D& m);

}  // namespace fuelred
