#pragma once

#include <span>
#include <vector>

namespace fuelred {

/// Piecewise-linear curve y(x) over ascending breakpoints. Outside the
/// breakpoint range the end values are held. An empty curve evaluates to 0.
class Curve1D {
public:
    Curve1D() = default;
    Curve1D(std::vector<double> xs, std::vector<double> ys);

    [[nodiscard]] double operator()(double x) const noexcept;

    [[nodiscard]] bool empty() const noexcept { return xs_.empty(); }
    [[nodiscard]] const std::vector<double>& xs() const noexcept { return xs_; }
    [[nodiscard]] const std::vector<double>& ys() const noexcept { return ys_; }

    friend bool operator==(const Curve1D&, const Curve1D&) = default;

private:
    std::vector<double> xs_;
    std::vector<double> ys_;
};

// Linear interpolation on ascending xs with end-value hold.
double interp_linear(std::span<const double> xs, std::span<const double> ys, double x) noexcept;

/// Percentile with linear interpolation between order statistics (inclusive
/// definition: rank = p/100 * (n-1)). p is in [0, 100]. Throws
/// std::invalid_argument on an empty sample.
double percentile(std::span<const double> values, double p);

double median(std::span<const double> values);

/// Central differences in the interior, one-sided differences at both ends.
/// Assumes uniform spacing dt.
std::vector<double> finite_difference(std::span<const double> values, double dt);

}  // namespace fuelred
