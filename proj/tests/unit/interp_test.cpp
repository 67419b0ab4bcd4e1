#include "fuelred/csv.hpp"
#include "fuelred/interp.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace fuelred;

namespace {

// Inclusive linear-interpolation percentile written out longhand.
double percentile_oracle(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double rank = p / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (rank - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

TEST(Percentile, ConstantSample) {
    const std::vector<double> v(20, 10.0);
    EXPECT_DOUBLE_EQ(percentile(v, 1.0), 10.0);
}

TEST(Percentile, OneToHundredFirstPercentile) {
    std::vector<double> v;
    for (int i = 100; i >= 1; --i) {
        v.push_back(i);
    }
    // rank 0.99 between the first two order statistics 1 and 2
    EXPECT_NEAR(percentile(v, 1.0), 1.99, 1e-12);
    EXPECT_NEAR(percentile(v, 95.0), percentile_oracle(v, 95.0), 1e-12);
}

TEST(Percentile, EmptyThrows) {
    EXPECT_THROW(percentile(std::vector<double>{}, 50.0), std::invalid_argument);
}

TEST(Median, OddAndEven) {
    EXPECT_DOUBLE_EQ(median(std::vector<double>{6, 4, 5}), 5.0);
    EXPECT_DOUBLE_EQ(median(std::vector<double>{1, 2, 3, 4}), 2.5);
}

TEST(Curve1D, HoldsEndValuesAndInterpolates) {
    const Curve1D c({0.0, 1.0, 3.0}, {0.0, 2.0, 6.0});
    EXPECT_DOUBLE_EQ(c(-5.0), 0.0);
    EXPECT_DOUBLE_EQ(c(0.5), 1.0);
    EXPECT_DOUBLE_EQ(c(2.0), 4.0);
    EXPECT_DOUBLE_EQ(c(10.0), 6.0);
    EXPECT_DOUBLE_EQ(Curve1D{}(1.0), 0.0);
}

TEST(FiniteDifference, ExactForQuadraticInterior) {
    const double dt = 0.1;
    std::vector<double> v;
    for (int i = 0; i <= 50; ++i) {
        const double t = i * dt;
        v.push_back(t * t);
    }
    const auto a = finite_difference(v, dt);
    for (int i = 1; i < 50; ++i) {
        EXPECT_NEAR(a[i], 2.0 * i * dt, 1e-9);
    }
}

TEST(Csv, FormatRoundTrips) {
    for (const double x : {0.1, 1.0 / 3.0, -2.5e-17, 123456789.125, 0.0}) {
        EXPECT_EQ(*csv::to_double(csv::format(x)), x);
    }
}

TEST(Csv, StrictNumberParsing) {
    EXPECT_FALSE(csv::to_double("1.0x"));
    EXPECT_FALSE(csv::to_double(""));
    EXPECT_EQ(*csv::to_long(" 7 "), 7);
}

TEST(Csv, SkipsCommentsAndBlankLines) {
    const auto t = csv::parse("# note\n\na,b\n1,2\n");
    ASSERT_EQ(t.header.size(), 2u);
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.line_numbers[0], 4u);
    EXPECT_EQ(t.column("b"), 1u);
}
