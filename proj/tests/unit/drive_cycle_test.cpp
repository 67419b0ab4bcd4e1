#include "fuelred/drive_cycle.hpp"
#include "fuelred/errors.hpp"
#include "support/campaign.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

using namespace fuelred;

namespace {

DriveCycle make(std::vector<CycleSample> s) { return DriveCycle("c", std::move(s)); }

void expect_speeds(const DriveCycle& c, const std::vector<double>& expected) {
    ASSERT_EQ(c.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_NEAR(c.samples()[i].v, expected[i], 1e-12) << "sample " << i;
    }
}

}  // namespace

TEST(LoadCycle, KphRowsConvertToMetresPerSecond) {
    const auto c = parse_cycle("t,v\n0,0\n1,10\n", SpeedUnit::kph, "x");
    ASSERT_EQ(c.size(), 2u);
    EXPECT_DOUBLE_EQ(c.samples()[0].v, 0.0);
    EXPECT_NEAR(c.samples()[1].v, 10.0 / 3.6, 1e-12);
    EXPECT_NEAR(c.samples()[1].v, 2.7778, 1e-4);
}

TEST(LoadCycle, MphUsesExactConversion) {
    const auto c = parse_cycle("t,v\n0,0\n1,60\n", SpeedUnit::mph, "x");
    EXPECT_NEAR(c.samples()[1].v, 60 * 1609.344 / 3600.0, 1e-12);
}

TEST(LoadCycle, EmptyInputIsParseError) {
    EXPECT_THROW(parse_cycle("", SpeedUnit::mps, "x"), ParseError);
}

TEST(LoadCycle, HeaderOnlyIsParseError) {
    EXPECT_THROW(parse_cycle("t,v\n", SpeedUnit::mps, "x"), ParseError);
}

TEST(LoadCycle, MalformedRowIsParseError) {
    EXPECT_THROW(parse_cycle("t,v\n0,0\n1,abc\n", SpeedUnit::mps, "x"), ParseError);
    EXPECT_THROW(parse_cycle("t,v\n0,0\n1\n", SpeedUnit::mps, "x"), ParseError);
}

TEST(LoadCycle, DuplicateTimestampIsMonotonicityError) {
    EXPECT_THROW(parse_cycle("t,v\n0,0\n0,5\n", SpeedUnit::mps, "x"), MonotonicityError);
}

TEST(LoadCycle, DecreasingTimeIsMonotonicityError) {
    EXPECT_THROW(parse_cycle("t,v\n0,0\n2,1\n1,1\n", SpeedUnit::mps, "x"), MonotonicityError);
}

TEST(LoadCycle, UnknownUnitTagIsUnitError) {
    EXPECT_THROW(parse_speed_unit("furlongs"), UnitError);
    EXPECT_EQ(parse_speed_unit("kph"), SpeedUnit::kph);
}

TEST(LoadCycle, NegativeSpeedRejected) {
    EXPECT_THROW(parse_cycle("t,v\n0,0\n1,-1\n", SpeedUnit::mps, "x"), ParseError);
}

TEST(LoadCycle, FileRoundTripKeepsNameFromStem) {
    test_support::TempDir dir("cycle");
    const auto path = dir.path() / "ramp.csv";
    const auto c = make({{0, 0}, {1, 2.5}, {2, 5}});
    write_cycle(path, c, SpeedUnit::kph);
    const auto back = load_cycle(path, SpeedUnit::kph);
    EXPECT_EQ(back.name(), "ramp");
    ASSERT_EQ(back.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(back.samples()[i].v, c.samples()[i].v, 1e-12);
    }
}

TEST(LoadCycle, MissingFileIsIoError) {
    EXPECT_THROW(load_cycle("/nonexistent/cycle.csv", SpeedUnit::mps), IoError);
}

TEST(Resample, LinearInterpolationOnUnitGrid) {
    expect_speeds(resample(make({{0, 0}, {2, 4}}), 1.0), {0, 2, 4});
}

TEST(Resample, ConstantCycleStaysConstant) {
    const auto r = resample(make({{0, 3}, {5, 3}}), 1.0);
    ASSERT_EQ(r.size(), 6u);
    for (const auto& s : r.samples()) {
        EXPECT_DOUBLE_EQ(s.v, 3.0);
    }
}

TEST(Resample, TriangleAtHalfSecond) {
    expect_speeds(resample(make({{0, 0}, {1, 1}, {2, 0}}), 0.5), {0, 0.5, 1, 0.5, 0});
}

TEST(Resample, NonPositiveDtIsInvalid) {
    const auto c = make({{0, 0}, {1, 1}});
    EXPECT_THROW(resample(c, 0.0), InvalidDt);
    EXPECT_THROW(resample(c, -0.1), InvalidDt);
}

TEST(Resample, GridTimesAreMultiplesOfDt) {
    const auto r = resample(make({{0, 0}, {1, 1}}), 0.1);
    ASSERT_EQ(r.size(), 11u);
    for (std::size_t i = 0; i < r.size(); ++i) {
        EXPECT_DOUBLE_EQ(r.samples()[i].t, static_cast<double>(i) * 0.1);
    }
}

TEST(Resample, IdempotentOnUniformCycle) {
    const auto once = resample(test_support::campaign().cycles.front(), 0.1);
    const auto twice = resample(once, 0.1);
    EXPECT_EQ(once, twice);
}

TEST(Resample, StaysWithinOriginalRange) {
    for (const auto& c : test_support::campaign().cycles) {
        const auto v = c.speeds();
        const auto r = resample(c, 0.1).speeds();
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        EXPECT_GE(*std::min_element(r.begin(), r.end()), *lo);
        EXPECT_LE(*std::max_element(r.begin(), r.end()), *hi);
    }
}

TEST(DriveCycle, InvariantsEnforced) {
    EXPECT_THROW(make({{0, 0}}), ParseError);
    EXPECT_THROW(make({{1, 0}, {2, 0}}), MonotonicityError);
}
