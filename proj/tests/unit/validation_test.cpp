#include "fuelred/errors.hpp"
#include "fuelred/validation.hpp"
#include "support/campaign.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace fuelred;

namespace {

Trace random_trace(std::uint64_t seed, std::size_t n, double t0 = 0.0, double dt = 0.1) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> fuel(0.0, 6.0), speed(100.0, 600.0), torque(-20.0, 300.0),
        pedal(0.0, 100.0);
    std::uniform_int_distribution<int> gear(1, 6);
    Trace t;
    t.name = "rand" + std::to_string(seed);
    for (std::size_t i = 0; i < n; ++i) {
        TraceRow r;
        r.t = t0 + dt * static_cast<double>(i);
        r.fuel = fuel(rng);
        r.engine_speed = speed(rng);
        r.engine_torque = torque(rng);
        r.pedal = pedal(rng);
        r.gear = gear(rng);
        t.rows.push_back(r);
    }
    return t;
}

Trace shifted(Trace t, double offset) {
    for (auto& r : t.rows) {
        r.t += offset;
    }
    return t;
}

Trace constant_fuel(double rate, double duration, double dt) {
    Trace t;
    t.has_dynamics = false;
    const auto n = static_cast<std::size_t>(std::lround(duration / dt));
    for (std::size_t i = 0; i <= n; ++i) {
        TraceRow r;
        r.t = dt * static_cast<double>(i);
        r.fuel = rate;
        t.rows.push_back(r);
    }
    return t;
}

}  // namespace

TEST(Align, IdenticalTracesPairIdentically) {
    const auto a = random_trace(1, 200);
    const auto p = align(a, a, 0.1);
    ASSERT_EQ(p.t.size(), a.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_NEAR(p.a.rows[i].fuel, a.rows[i].fuel, 1e-12);
        EXPECT_NEAR(p.b.rows[i].fuel, a.rows[i].fuel, 1e-12);
        EXPECT_EQ(p.a.rows[i].gear, a.rows[i].gear);
    }
}

TEST(Align, DisjointRangesThrow) {
    EXPECT_THROW(align(random_trace(1, 50), random_trace(2, 50, 100.0), 0.1), NoOverlap);
}

TEST(Align, ShiftedCopiesOverlapCount) {
    const auto a = random_trace(3, 301);  // [0, 30] s
    const auto b = shifted(a, 7.0);       // [7, 37] s
    EXPECT_EQ(align(a, b, 0.1).t.size(), static_cast<std::size_t>(23.0 / 0.1) + 1);
    EXPECT_EQ(align(a, b, 0.5).t.size(), static_cast<std::size_t>(23.0 / 0.5) + 1);
}

TEST(Align, GearUsesNearestSampleAndFuelInterpolates) {
    Trace a;
    for (int i = 0; i < 3; ++i) {
        TraceRow r;
        r.t = i;
        r.gear = i + 1;
        r.fuel = 2.0 * i;
        a.rows.push_back(r);
    }
    const auto p = align(a, a, 0.25);
    ASSERT_EQ(p.t.size(), 9u);
    EXPECT_EQ(p.a.rows[1].gear, 1);  // t = 0.25
    EXPECT_EQ(p.a.rows[3].gear, 2);  // t = 0.75
    EXPECT_DOUBLE_EQ(p.a.rows[3].fuel, 1.5);
}

TEST(Align, NonPositiveDt) { EXPECT_THROW(align(random_trace(1, 5), random_trace(1, 5), 0.0), InvalidDt); }

TEST(Mae, Examples) {
    const std::vector<double> a{1, 2}, b{2, 4};
    EXPECT_DOUBLE_EQ(mae(a, b), 1.5);
    EXPECT_DOUBLE_EQ(mae(b, a), 1.5);
    EXPECT_EQ(mae(a, a), 0.0);
    EXPECT_THROW(mae(a, std::vector<double>{1}), LengthMismatch);
    EXPECT_THROW(mae(std::vector<double>{}, std::vector<double>{}), LengthMismatch);
}

TEST(Mae, BoundedBelowByMeanDifference) {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> d(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(100), b(100);
        for (auto& x : a) x = d(rng);
        for (auto& x : b) x = d(rng) + 0.5;
        const double ma = std::accumulate(a.begin(), a.end(), 0.0) / 100.0;
        const double mb = std::accumulate(b.begin(), b.end(), 0.0) / 100.0;
        EXPECT_GE(mae(a, b) + 1e-12, std::abs(ma - mb));
    }
}

TEST(CumulativeFuel, Rectangle) {
    EXPECT_NEAR(cumulative_fuel(constant_fuel(1.0, 10.0, 0.1)).total, 10.0, 1e-9);
    EXPECT_EQ(cumulative_fuel(constant_fuel(0.0, 10.0, 0.1)).total, 0.0);
}

TEST(CumulativeFuel, Triangle) {
    std::vector<double> t, f;
    for (int i = 0; i <= 100; ++i) {
        t.push_back(0.1 * i);
        f.push_back(i <= 50 ? 2.0 * i / 50.0 : 2.0 * (100 - i) / 50.0);
    }
    const auto c = cumulative_fuel(t, f);
    EXPECT_NEAR(c.total, 10.0, 1e-9);
    ASSERT_EQ(c.running.size(), t.size());
    EXPECT_EQ(c.running.front(), 0.0);
    EXPECT_NEAR(c.running[50], 5.0, 1e-9);
    EXPECT_TRUE(std::is_sorted(c.running.begin(), c.running.end()));
}

TEST(CumulativeFuel, AdditiveOverConcatenatedSegments) {
    const auto whole = random_trace(5, 401);
    Trace first, second;
    first.rows.assign(whole.rows.begin(), whole.rows.begin() + 201);
    second.rows.assign(whole.rows.begin() + 200, whole.rows.end());
    EXPECT_NEAR(cumulative_fuel(whole).total, cumulative_fuel(first).total + cumulative_fuel(second).total, 1e-10);
}

TEST(CumulativeError, Examples) {
    EXPECT_EQ(cumulative_error_pct(100.0, 100.0), 0.0);
    EXPECT_NEAR(cumulative_error_pct(100.0, 105.0), 5.0, 1e-12);
    EXPECT_NEAR(cumulative_error_pct(100.0, 95.0), 5.0, 1e-12);
    EXPECT_THROW(cumulative_error_pct(0.0, 5.0), ZeroReference);
    EXPECT_THROW(cumulative_error_pct(constant_fuel(0.0, 5.0, 0.1), constant_fuel(1.0, 5.0, 0.1)), ZeroReference);
}

TEST(GearMetrics, Examples) {
    const std::vector<int> ref{1, 2, 3, 4};
    const auto same = gear_metrics(ref, ref);
    EXPECT_EQ(same.mae_gear, 0.0);
    EXPECT_EQ(same.mismatch_pct, 0.0);
    const std::vector<int> half{2, 2, 4, 4};
    const auto g = gear_metrics(ref, half);
    EXPECT_DOUBLE_EQ(g.mae_gear, 0.5);
    EXPECT_DOUBLE_EQ(g.mismatch_pct, 50.0);
    EXPECT_THROW(gear_metrics(ref, std::vector<int>{1}), LengthMismatch);
}

TEST(GearMetrics, ZeroMismatchIffZeroMae) {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> g(1, 3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> a(5), b(5);
        for (auto& x : a) x = g(rng);
        for (auto& x : b) x = g(rng);
        const auto m = gear_metrics(a, b);
        EXPECT_EQ(m.mismatch_pct == 0.0, m.mae_gear == 0.0);
        EXPECT_GE(m.mismatch_pct, 0.0);
        EXPECT_LE(m.mismatch_pct, 100.0);
    }
}

TEST(Compare, MatchesBruteForceLoops) {
    const auto a = random_trace(11, 1000);
    const auto b = random_trace(12, 1000);
    const auto m = compare(align(a, b, 0.1), 0.1);
    double fuel = 0.0, rpm = 0.0, gear = 0.0, cum_a = 0.0, cum_b = 0.0;
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
        fuel += std::abs(a.rows[i].fuel - b.rows[i].fuel);
        rpm += std::abs(a.rows[i].engine_speed - b.rows[i].engine_speed) * 60.0 / (2.0 * std::numbers::pi);
        gear += std::abs(a.rows[i].gear - b.rows[i].gear);
        mismatches += a.rows[i].gear != b.rows[i].gear ? 1 : 0;
        if (i > 0) {
            cum_a += 0.05 * (a.rows[i].fuel + a.rows[i - 1].fuel);
            cum_b += 0.05 * (b.rows[i].fuel + b.rows[i - 1].fuel);
        }
    }
    EXPECT_NEAR(m.mae_fuel, fuel / 1000.0, 1e-12 * fuel / 1000.0);
    EXPECT_NEAR(*m.mae_engine_speed, rpm / 1000.0, 1e-9);
    EXPECT_NEAR(*m.mae_gear, gear / 1000.0, 1e-12);
    EXPECT_NEAR(*m.gear_mismatch_pct, 100.0 * static_cast<double>(mismatches) / 1000.0, 1e-12);
    EXPECT_NEAR(m.cumulative_fuel_ref, cum_a, 1e-9);
    EXPECT_NEAR(m.cumulative_fuel_model, cum_b, 1e-9);
}

TEST(Compare, InvariantUnderCommonTimeShift) {
    const auto a = random_trace(21, 300);
    const auto b = shifted(random_trace(22, 300), 2.5);
    const auto m0 = compare(align(a, b, 0.1), 0.1);
    const auto m1 = compare(align(shifted(a, 1000.0), shifted(b, 1000.0), 0.1), 0.1);
    EXPECT_EQ(m0.steps, m1.steps);
    EXPECT_NEAR(m0.mae_fuel, m1.mae_fuel, 1e-9);
    EXPECT_NEAR(m0.cumulative_error_pct, m1.cumulative_error_pct, 1e-9);
    EXPECT_NEAR(*m0.mae_engine_torque, *m1.mae_engine_torque, 1e-9);
    EXPECT_EQ(*m0.gear_mismatch_pct, *m1.gear_mismatch_pct);
}

TEST(Compare, FuelOnlyTraceOmitsDynamics) {
    const auto m = compare(align(constant_fuel(1.0, 5.0, 0.1), random_trace(1, 51), 0.1), 0.1);
    EXPECT_FALSE(m.mae_engine_speed.has_value());
    EXPECT_FALSE(m.gear_mismatch_pct.has_value());
}

TEST(BuildReport, IdenticalTracesGiveZeroReport) {
    const auto a = random_trace(31, 100);
    const std::vector<ValidationPair> pairs{{"x", "cyc", "ref", "model", a, a}};
    const auto r = build_report(pairs, 0.1);
    const auto& m = r.pairs.at("x");
    EXPECT_EQ(m.mae_fuel, 0.0);
    EXPECT_EQ(m.cumulative_error_pct, 0.0);
    EXPECT_EQ(*m.mae_gear, 0.0);
    EXPECT_EQ(*m.gear_mismatch_pct, 0.0);
    EXPECT_EQ(m.cycle, "cyc");
}

TEST(BuildReport, PermutationInvariantAndJsonRoundTrip) {
    std::vector<ValidationPair> pairs{{"p1", "c1", "ref", "semi", random_trace(1, 100), random_trace(2, 100)},
                                      {"p2", "c2", "ref", "simplified", random_trace(3, 80), random_trace(4, 90)},
                                      {"p3", "c3", "dyno", "semi", constant_fuel(1.0, 9.0, 0.1),
                                       random_trace(5, 91)}};
    const auto forward = build_report(pairs, 0.1);
    std::reverse(pairs.begin(), pairs.end());
    EXPECT_EQ(build_report(pairs, 0.1), forward);

    const nlohmann::json j = forward;
    EXPECT_EQ(j.get<ValidationReport>(), forward);
    EXPECT_EQ(nlohmann::json::parse(j.dump()).get<ValidationReport>(), forward);
}

TEST(BuildReport, RejectsEmptyAndDuplicateNames) {
    EXPECT_THROW(build_report(std::vector<ValidationPair>{}, 0.1), ConfigError);
    const auto a = random_trace(1, 20);
    const std::vector<ValidationPair> dup{{"x", "c", "r", "m", a, a}, {"x", "c", "r", "m", a, a}};
    EXPECT_THROW(build_report(dup, 0.1), ConfigError);
    const std::vector<ValidationPair> disjoint{{"x", "c", "r", "m", a, shifted(a, 100.0)}};
    EXPECT_THROW(build_report(disjoint, 0.1), NoOverlap);
}

TEST(BuildReport, TableAndComparisonCsv) {
    const auto a = random_trace(41, 50);
    const auto b = random_trace(42, 50);
    const std::vector<ValidationPair> pairs{{"hw_semi", "hwfet_like", "ref", "semi", a, b}};
    const auto table = format_report(build_report(pairs, 0.1));
    EXPECT_NE(table.find("hw_semi"), std::string::npos);

    EXPECT_EQ(comparison_file_name("hwfet_like", "semi", "ref"), "hwfet_like_semi_vs_ref.csv");
    test_support::TempDir dir("validation");
    const auto path = dir.path() / "cmp.csv";
    write_comparison_csv(path, align(a, b, 0.1));
    const auto text = test_support::read_file(path);
    EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), 51u);
}
