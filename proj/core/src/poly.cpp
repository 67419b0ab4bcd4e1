#include "fuelred/poly.hpp"

#include "fuelred/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

namespace fuelred {

namespace {

std::vector<double> powers(double x, int degree) {
    std::vector<double> p(static_cast<std::size_t>(degree) + 1, 1.0);
    for (std::size_t i = 1; i < p.size(); ++i) {
        p[i] = p[i - 1] * x;
    }
    return p;
}

Standardization standardize(std::span<const double> values) {
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (const double v : values) {
        ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / n);
    return {mean, sd > 0.0 ? sd : 1.0};
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

}  // namespace

PolyMap2D::PolyMap2D(PolyDegree degree, std::vector<double> coeffs, Standardization sx, Standardization sy,
                     Box2D domain)
    : degree_(degree), coeffs_(std::move(coeffs)), sx_(sx), sy_(sy), domain_(domain) {
    if (degree_.x < 0 || degree_.y < 0) {
        throw std::invalid_argument("polynomial degree must be non-negative");
    }
    if (coeffs_.size() != static_cast<std::size_t>((degree_.x + 1) * (degree_.y + 1))) {
        throw std::invalid_argument("coefficient count does not match (d1+1)(d2+1)");
    }
    if (!(domain_.x_min <= domain_.x_max && domain_.y_min <= domain_.y_max)) {
        throw std::invalid_argument("polynomial domain box is empty");
    }
}

double PolyMap2D::operator()(double x, double y) const noexcept {
    const double xs = sx_.apply(x);
    const double ys = sy_.apply(y);
    const auto ny = static_cast<std::size_t>(degree_.y) + 1;
    // Horner in y for each x power, then Horner in x.
    double result = 0.0;
    for (int i = degree_.x; i >= 0; --i) {
        double row = 0.0;
        for (int j = degree_.y; j >= 0; --j) {
            row = row * ys + coeffs_[static_cast<std::size_t>(i) * ny + static_cast<std::size_t>(j)];
        }
        result = result * xs + row;
    }
    return result;
}

double PolyMap2D::eval_clamped(double x, double y, bool* clamped) const noexcept {
    const double cx = std::clamp(x, domain_.x_min, domain_.x_max);
    const double cy = std::clamp(y, domain_.y_min, domain_.y_max);
    if (clamped != nullptr && (cx != x || cy != y)) {
        *clamped = true;
    }
    return (*this)(cx, cy);
}

std::vector<double> PolyMap2D::raw_coefficients() const {
    // ((x - mx)/sx)^i = sum_p C(i,p) x^p (-mx)^(i-p) / sx^i
    const auto ny = static_cast<std::size_t>(degree_.y) + 1;
    std::vector<double> raw(coeffs_.size(), 0.0);
    for (int i = 0; i <= degree_.x; ++i) {
        for (int j = 0; j <= degree_.y; ++j) {
            const double c = coeffs_[static_cast<std::size_t>(i) * ny + static_cast<std::size_t>(j)];
            if (c == 0.0) {
                continue;
            }
            for (int p = 0; p <= i; ++p) {
                const double fx = binomial(i, p) * std::pow(-sx_.mean, i - p) / std::pow(sx_.scale, i);
                for (int q = 0; q <= j; ++q) {
                    const double fy = binomial(j, q) * std::pow(-sy_.mean, j - q) / std::pow(sy_.scale, j);
                    raw[static_cast<std::size_t>(p) * ny + static_cast<std::size_t>(q)] += c * fx * fy;
                }
            }
        }
    }
    return raw;
}

std::vector<double> solve_least_squares(std::span<const double> design_col_major, std::size_t rows,
                                        std::size_t cols, std::span<const double> rhs) {
    if (rows < cols) {
        throw RankDeficient("least squares needs at least " + std::to_string(cols) + " samples, got " +
                            std::to_string(rows));
    }
    const Eigen::Map<const Eigen::MatrixXd> raw(design_col_major.data(), static_cast<Eigen::Index>(rows),
                                                static_cast<Eigen::Index>(cols));
    const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rows));
    // Equilibrate columns so the rank threshold is scale-free.
    Eigen::VectorXd norms = raw.colwise().norm().transpose();
    for (Eigen::Index c = 0; c < norms.size(); ++c) {
        if (norms[c] == 0.0) {
            throw RankDeficient("design matrix column " + std::to_string(c) + " is identically zero");
        }
    }
    const Eigen::MatrixXd a = raw * norms.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(cols)) {
        throw RankDeficient("design matrix has rank " + std::to_string(qr.rank()) + " < " + std::to_string(cols));
    }
    const Eigen::VectorXd x = qr.solve(b).cwiseQuotient(norms);
    return {x.data(), x.data() + x.size()};
}

namespace {

// Lawson-Hanson non-negative least squares: min |M u - d| over u >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& m, const Eigen::VectorXd& d) {
    const Eigen::Index n = m.cols();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    const double tol = 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());

    const auto solve_passive = [&](std::vector<Eigen::Index>& idx) {
        idx.clear();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (passive[static_cast<std::size_t>(j)]) {
                idx.push_back(j);
            }
        }
        Eigen::MatrixXd sub(m.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) {
            sub.col(static_cast<Eigen::Index>(k)) = m.col(idx[k]);
        }
        return Eigen::VectorXd(sub.colPivHouseholderQr().solve(d));
    };

    const int max_outer = 3 * static_cast<int>(n) + 10;
    std::vector<Eigen::Index> idx;
    for (int outer = 0; outer < max_outer; ++outer) {
        const Eigen::VectorXd w = m.transpose() * (d - m * u);
        Eigen::Index best = -1;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!passive[static_cast<std::size_t>(j)] && w[j] > tol && (best < 0 || w[j] > w[best])) {
                best = j;
            }
        }
        if (best < 0) {
            return u;
        }
        passive[static_cast<std::size_t>(best)] = true;
        for (int inner = 0; inner <= n; ++inner) {
            const Eigen::VectorXd s = solve_passive(idx);
            double alpha = 1.0;
            bool feasible = true;
            for (std::size_t k = 0; k < idx.size(); ++k) {
                const auto sk = s[static_cast<Eigen::Index>(k)];
                if (sk <= 0.0) {
                    feasible = false;
                    const double uk = u[idx[k]];
                    alpha = std::min(alpha, uk / (uk - sk));
                }
            }
            if (feasible) {
                u.setZero();
                for (std::size_t k = 0; k < idx.size(); ++k) {
                    u[idx[k]] = s[static_cast<Eigen::Index>(k)];
                }
                break;
            }
            for (std::size_t k = 0; k < idx.size(); ++k) {
                const Eigen::Index j = idx[k];
                u[j] += alpha * (s[static_cast<Eigen::Index>(k)] - u[j]);
                if (u[j] <= tol) {
                    u[j] = 0.0;
                    passive[static_cast<std::size_t>(j)] = false;
                }
            }
        }
    }
    throw ConstraintInfeasible("non-negative least squares did not converge");
}

}  // namespace

std::vector<double> solve_constrained_least_squares(std::span<const double> design_col_major, std::size_t rows,
                                                    std::size_t cols, std::span<const double> rhs,
                                                    std::span<const double> constraints_row_major,
                                                    std::span<const double> bounds) {
    if (constraints_row_major.size() != bounds.size() * cols) {
        throw std::invalid_argument("constraint matrix does not match the bounds");
    }
    const auto x_ls = solve_least_squares(design_col_major, rows, cols, rhs);
    const auto n = static_cast<Eigen::Index>(cols);
    const auto mc = static_cast<Eigen::Index>(bounds.size());
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMajor> g(constraints_row_major.data(), mc, n);
    const Eigen::Map<const Eigen::VectorXd> h(bounds.data(), mc);
    const Eigen::Map<const Eigen::VectorXd> x0(x_ls.data(), n);
    if (mc == 0 || ((g * x0 - h).array() >= 0.0).all()) {
        return x_ls;
    }

    // Reduce to a least-distance problem: with A D^-1 = Q R (D the column
    // norms) and z = R D x - Q^T b, minimise |z| subject to E z >= f.
    const Eigen::Map<const Eigen::MatrixXd> a(design_col_major.data(), static_cast<Eigen::Index>(rows), n);
    const Eigen::VectorXd norms = a.colwise().norm().transpose();
    const Eigen::MatrixXd scaled = a * norms.cwiseInverse().asDiagonal();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(scaled);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    const Eigen::VectorXd y0 = norms.cwiseProduct(x0);

    const Eigen::MatrixXd gs = g * norms.cwiseInverse().asDiagonal();
    // E = G D^-1 R^-1, computed as (R^-T (G D^-1)^T)^T.
    Eigen::MatrixXd e = r.transpose().triangularView<Eigen::Lower>().solve(gs.transpose()).transpose();
    Eigen::VectorXd f = h - gs * y0;
    for (Eigen::Index i = 0; i < mc; ++i) {
        const double norm = e.row(i).norm();
        if (norm == 0.0) {
            if (f[i] > 0.0) {
                throw ConstraintInfeasible("constraint " + std::to_string(i) + " does not depend on the coefficients");
            }
            continue;
        }
        e.row(i) /= norm;
        f[i] /= norm;
    }

    // Least-distance programming through NNLS on [E^T; f^T] u = e_(n+1).
    Eigen::MatrixXd m(n + 1, mc);
    m.topRows(n) = e.transpose();
    m.row(n) = f.transpose();
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n + 1);
    d[n] = 1.0;
    const Eigen::VectorXd u = nnls(m, d);
    const Eigen::VectorXd resid = m * u - d;
    if (resid.norm() < 1e-10 || resid[n] >= 0.0) {
        throw ConstraintInfeasible("no coefficients satisfy all " + std::to_string(mc) + " constraints");
    }
    const Eigen::VectorXd z = -resid.head(n) / resid[n];
    const Eigen::VectorXd y = y0 + r.triangularView<Eigen::Upper>().solve(z);
    const Eigen::VectorXd x = y.cwiseQuotient(norms);
    return {x.data(), x.data() + x.size()};
}

PolyFit fit_poly2d(std::span<const double> xs, std::span<const double> ys, std::span<const double> zs,
                   PolyDegree degree, const PolyFitOptions& options) {
    if (xs.size() != ys.size() || xs.size() != zs.size()) {
        throw std::invalid_argument("fit_poly2d: input lengths differ");
    }
    if (degree.x < 0 || degree.y < 0) {
        throw std::invalid_argument("fit_poly2d: negative degree");
    }
    if (degree.total() > options.max_total_degree) {
        throw DegreeTooHigh("total degree " + std::to_string(degree.total()) + " exceeds cap " +
                            std::to_string(options.max_total_degree));
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]) || !std::isfinite(zs[i])) {
            throw std::invalid_argument("fit_poly2d: non-finite sample at index " + std::to_string(i));
        }
    }
    const std::size_t n = xs.size();
    const auto nx = static_cast<std::size_t>(degree.x) + 1;
    const auto ny = static_cast<std::size_t>(degree.y) + 1;
    const std::size_t cols = nx * ny;
    if (n < cols) {
        throw RankDeficient("need at least " + std::to_string(cols) + " samples for degree (" +
                            std::to_string(degree.x) + "," + std::to_string(degree.y) + "), got " +
                            std::to_string(n));
    }

    const Standardization sx = standardize(xs);
    const Standardization sy = standardize(ys);

    std::vector<double> design(n * cols);
    for (std::size_t r = 0; r < n; ++r) {
        const auto px = powers(sx.apply(xs[r]), degree.x);
        const auto py = powers(sy.apply(ys[r]), degree.y);
        for (std::size_t i = 0; i < nx; ++i) {
            for (std::size_t j = 0; j < ny; ++j) {
                design[(i * ny + j) * n + r] = px[i] * py[j];
            }
        }
    }
    auto coeffs = solve_least_squares(design, n, cols, zs);

    const auto [x_lo, x_hi] = std::minmax_element(xs.begin(), xs.end());
    const auto [y_lo, y_hi] = std::minmax_element(ys.begin(), ys.end());
    PolyFit fit{PolyMap2D(degree, std::move(coeffs), sx, sy, Box2D{*x_lo, *x_hi, *y_lo, *y_hi}), 0.0, n};

    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double e = fit.map(xs[r], ys[r]) - zs[r];
        ss += e * e;
    }
    fit.rms_residual = std::sqrt(ss / static_cast<double>(n));
    return fit;
}

double polyval(std::span<const double> coeffs, double x) noexcept {
    double r = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        r = r * x + *it;
    }
    return r;
}

void to_json(nlohmann::json& j, const PolyMap2D& m) {
    j = nlohmann::json{{"degree", {m.degree().x, m.degree().y}},
                       {"coefficients", m.coefficients()},
                       {"x_mean", m.x_standardization().mean},
                       {"x_scale", m.x_standardization().scale},
                       {"y_mean", m.y_standardization().mean},
                       {"y_scale", m.y_standardization().scale},
                       {"domain", {m.domain().x_min, m.domain().x_max, m.domain().y_min, m.domain().y_max}}};
}

void from_json(const nlohmann::json& j, PolyMap2D& m) {
    const auto deg = j.at("degree").get<std::vector<int>>();
    const auto dom = j.at("domain").get<std::vector<double>>();
    if (deg.size() != 2 || dom.size() != 4) {
        throw std::invalid_argument("malformed polynomial map");
    }
    m = PolyMap2D(PolyDegree{deg[0], deg[1]}, j.at("coefficients").get<std::vector<double>>(),
                  Standardization{j.at("x_mean").get<double>(), j.at("x_scale").get<double>()},
                  Standardization{j.at("y_mean").get<double>(), j.at("y_scale").get<double>()},
                  Box2D{dom[0], dom[1], dom[2], dom[3]});
}

}  // namespace fuelred
