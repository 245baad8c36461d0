#include "doctest.h"

#include <cmath>

#include "lipband/common.hpp"
#include "lipband/index.hpp"

using namespace lipband;

namespace {

ArmStats stats_of(std::uint64_t pulls, double sum) {
    ArmStats s;
    s.pulls = pulls;
    s.reward_sum = sum;
    return s;
}

} // namespace

TEST_CASE("arm stats accumulate") {
    ArmStats s;
    CHECK(s.pulls == 0);
    s.add(0.25);
    s.add(0.75);
    s.add(0.5);
    CHECK(s.pulls == 3);
    CHECK(s.reward_sum == doctest::Approx(1.5));
    CHECK(s.mean() == doctest::Approx(0.5));
}

TEST_CASE("confidence width formula") {
    const std::uint64_t T = 1u << 14;
    CHECK(confidence_width(0, T) == kInfinity);
    // sqrt(6 ln T / n)
    CHECK(confidence_width(50, T) == doctest::Approx(std::sqrt(6.0 * std::log(16384.0) / 50.0)));
    CHECK(confidence_width(50, T) == doctest::Approx(1.0791141200583603));
    CHECK(confidence_width(1, 100) == doctest::Approx(std::sqrt(6.0 * std::log(100.0))));

    // shrinks with pulls, grows with horizon
    CHECK(confidence_width(200, T) < confidence_width(100, T));
    CHECK(confidence_width(100, T) < confidence_width(100, T << 4));
}

TEST_CASE("ucb index adds width to the mean") {
    const std::uint64_t T = 1000;
    const ArmStats s = stats_of(4, 2.0);
    CHECK(ucb_index(s, T) == doctest::Approx(0.5 + confidence_width(4, T)));
    CHECK(ucb_index(ArmStats{}, T) == kInfinity);
}

TEST_CASE("confidence interval is symmetric about the mean") {
    const std::uint64_t T = 1u << 14;
    const ArmStats s = stats_of(100, 64.0);
    const Interval iv = confidence_interval(s, T);
    const double w = confidence_width(100, T);
    CHECK(iv.lo == doctest::Approx(0.64 - w));
    CHECK(iv.hi == doctest::Approx(0.64 + w));

    const Interval fresh = confidence_interval(ArmStats{}, T);
    CHECK(fresh.lo == -kInfinity);
    CHECK(fresh.hi == kInfinity);
}

TEST_CASE("strictly above compares interval endpoints") {
    CHECK(strictly_above(Interval{0.6, 0.9}, Interval{0.1, 0.5}));
    CHECK_FALSE(strictly_above(Interval{0.4, 0.9}, Interval{0.1, 0.5}));
    // touching endpoints do not separate
    CHECK_FALSE(strictly_above(Interval{0.5, 0.9}, Interval{0.1, 0.5}));
}

TEST_CASE("unpulled arms never separate") {
    const std::uint64_t T = 1u << 14;
    const Interval fresh = confidence_interval(ArmStats{}, T);
    const Interval solid = confidence_interval(stats_of(1000, 900.0), T);
    CHECK_FALSE(strictly_above(solid, fresh));
    CHECK_FALSE(strictly_above(fresh, solid));
}

TEST_CASE("separating a wide gap takes enough pulls") {
    const std::uint64_t T = 1u << 14;
    // means 0.9 and 0.1: a 0.8 gap
    const auto good_at = [](std::uint64_t n) { return stats_of(n, 0.9 * static_cast<double>(n)); };
    const auto bad_at = [](std::uint64_t n) { return stats_of(n, 0.1 * static_cast<double>(n)); };

    CHECK_FALSE(strictly_above(confidence_interval(good_at(50), T),
                               confidence_interval(bad_at(50), T)));
    CHECK(strictly_above(confidence_interval(good_at(1000), T),
                         confidence_interval(bad_at(1000), T)));
}
