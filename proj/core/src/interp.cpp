#include "fuelred/interp.hpp"

#include <algorithm>
#include <stdexcept>

namespace fuelred {

Curve1D::Curve1D(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() != ys_.size()) {
        throw std::invalid_argument("Curve1D: xs and ys differ in length");
    }
    for (std::size_t i = 1; i < xs_.size(); ++i) {
        if (!(xs_[i] > xs_[i - 1])) {
            throw std::invalid_argument("Curve1D: breakpoints must be strictly ascending");
        }
    }
}

double Curve1D::operator()(double x) const noexcept {
    if (xs_.empty()) {
        return 0.0;
    }
    return interp_linear(xs_, ys_, x);
}

double interp_linear(std::span<const double> xs, std::span<const double> ys, double x) noexcept {
    if (xs.size() == 1 || x <= xs.front()) {
        return ys.front();
    }
    if (x >= xs.back()) {
        return ys.back();
    }
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + w * (ys[hi] - ys[lo]);
}

double percentile(std::span<const double> values, double p) {
    if (values.empty()) {
        throw std::invalid_argument("percentile of an empty sample");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double rank = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(rank);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double median(std::span<const double> values) { return percentile(values, 50.0); }

std::vector<double> finite_difference(std::span<const double> values, double dt) {
    const std::size_t n = values.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) {
        return d;
    }
    d.front() = (values[1] - values[0]) / dt;
    d.back() = (values[n - 1] - values[n - 2]) / dt;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        d[i] = (values[i + 1] - values[i - 1]) / (2.0 * dt);
    }
    return d;
}

}  // namespace fuelred
