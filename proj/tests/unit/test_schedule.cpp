#include <gtest/gtest.h>

#include <cmath>

#include "airfed/error.hpp"
#include "airfed/schedule.hpp"

namespace airfed::fedsim {
namespace {

TEST(Stepsize, Shapes) {
  EXPECT_EQ(constant_stepsize(0.1)(7), 0.1);
  EXPECT_DOUBLE_EQ(inverse_time_stepsize(2.0, 0.5, 3.0)(1), 2.0 / (0.5 * 4.0));
  EXPECT_DOUBLE_EQ(inverse_sqrt_stepsize(2.0, 400)(9), 0.1);
  EXPECT_DOUBLE_EQ(linear_stepsize(0.1)(3), 0.3);
  EXPECT_THROW(constant_stepsize(0.0), ConfigError);
  EXPECT_THROW(inverse_time_stepsize(1.0, 0.0, 1.0), ConfigError);
}

TEST(Stepsize, AutoOffsetIsSmallestMeetingCap) {
  const double c = 9, mu = 0.3, ell = 2.0, L = 1.5, c0 = 1.0;
  const double k0 = auto_offset(c, mu, ell, L, c0);
  const double cap = c0 / (ell + L);
  EXPECT_LE(inverse_time_stepsize(c, mu, k0)(1), cap);
  EXPECT_GT(inverse_time_stepsize(c, mu, k0 - 1)(1), cap);
}

TEST(ValidateStepsizes, AcceptsDecayingRejectsIncreasing) {
  const double mu = 0.3, L = 1.5, ell = 2.0, c0 = 1.0, c = 9;
  const auto ok = inverse_time_stepsize(c, mu, auto_offset(c, mu, ell, L, c0));
  EXPECT_TRUE(validate_stepsizes(ok, mu, L, ell, c0, 10000).ok);

  // eta_k = k breaks the cap at once.
  const auto rep = validate_stepsizes(linear_stepsize(1.0), mu, L, ell, c0, 100);
  EXPECT_FALSE(rep.ok);
  ASSERT_FALSE(rep.violations.empty());
  EXPECT_EQ(rep.violations.front().k, 1u);
  EXPECT_NE(rep.summary().find("eta_k <= c0 / (ell^2 + L)"), std::string::npos);
  // A slowly growing schedule passes early rounds and fails where it crosses the cap.
  const auto slow = validate_stepsizes(linear_stepsize(1e-4), mu, L, ell, c0, 10000);
  ASSERT_FALSE(slow.ok);
  EXPECT_EQ(slow.violations.front().k, 2858u);
}

TEST(ValidateStepsizes, RecursionNeedsLargeEnoughConstant) {
  // eta_k / eta_{k+1} = 1 + 1/(k + k0) <= 1 + c/(8 (k + 1 + k0)) needs c > 8.
  const double mu = 0.5, L = 1.0, ell = 1.0, c0 = 1.0;
  for (double c : {4.0, 8.0}) {
    const auto s = inverse_time_stepsize(c, mu, auto_offset(c, mu, ell, L, c0));
    EXPECT_FALSE(validate_stepsizes(s, mu, L, ell, c0, 1000).ok) << c;
  }
  const auto s = inverse_time_stepsize(9.0, mu, auto_offset(9.0, mu, ell, L, c0));
  EXPECT_TRUE(validate_stepsizes(s, mu, L, ell, c0, 1000).ok);
  // Without the strongly convex recursion only the cap is checked.
  const auto small = inverse_time_stepsize(4.0, mu, auto_offset(4.0, mu, ell, L, c0));
  EXPECT_TRUE(validate_stepsizes(small, mu, L, ell, c0, 1000, false).ok);
}

TEST(ValidateStepsizes, CapViolationReportsBothSides) {
  const auto rep = validate_stepsizes(constant_stepsize(1.0), 0.0, 1.0, 1.0, 0.5, 5, false);
  EXPECT_FALSE(rep.ok);
  EXPECT_EQ(rep.violation_count, 5u);
  EXPECT_EQ(rep.violations.front().lhs, 1.0);
  EXPECT_EQ(rep.violations.front().rhs, 0.25);
}

TEST(SyncTimes, GeometricAndFixed) {
  EXPECT_EQ(fixed_sync(4).times(13), (std::vector<std::size_t>{4, 8, 12}));
  const auto g = geometric_sync(2.0).times(40);
  EXPECT_EQ(g, (std::vector<std::size_t>{2, 4, 8, 16, 32}));
  const auto slow = geometric_sync(1.1).times(30);
  for (std::size_t i = 1; i < slow.size(); ++i) EXPECT_GT(slow[i], slow[i - 1]);
  EXPECT_EQ(slow.front(), 2u);
  EXPECT_TRUE(no_sync().times(100).empty());
  EXPECT_THROW(geometric_sync(1.0), ConfigError);
  EXPECT_THROW(fixed_sync(0), ConfigError);
}

TEST(ValidateSync, IntervalBudget) {
  const double L = 2.0;
  const auto eta = constant_stepsize(0.01);
  const std::size_t best = auto_interval(0.01, L, 1.0);
  EXPECT_EQ(best, 25u);
  EXPECT_TRUE(validate_sync(fixed_sync(best), eta, L, 1000).ok);
  EXPECT_FALSE(validate_sync(fixed_sync(best + 1), eta, L, 1000).ok);
  // The open segment after the last sync counts too.
  EXPECT_TRUE(validate_sync(fixed_sync(5000), eta, L, best).ok);
  EXPECT_FALSE(validate_sync(fixed_sync(5000), eta, L, best + 1).ok);
  EXPECT_FALSE(validate_sync(no_sync(), eta, L, 1000).ok);
}

TEST(SampleR, ConstantStepsizesAreUniform) {
  RngStream r(3);
  std::vector<int> counts(5, 0);
  const int trials = 1000000;
  for (int t = 0; t < trials; ++t) ++counts[sample_R(constant_stepsize(0.1), 5, r)];
  for (const int c : counts) EXPECT_NEAR(c, trials / 5.0, 5 * std::sqrt(trials * 0.2 * 0.8));
}

TEST(SampleR, MatchesExactExpectation) {
  const auto eta = inverse_time_stepsize(1.0, 1.0, 0.0);
  const std::size_t n = 50;
  std::vector<double> values(n);
  for (std::size_t k = 0; k < n; ++k) values[k] = static_cast<double>(k * k);
  const double exact = expectation_over_R(eta, values);
  RngStream r(7);
  const int trials = 400000;
  double s = 0, s2 = 0;
  for (int t = 0; t < trials; ++t) {
    const double v = values[sample_R(eta, n, r)];
    s += v;
    s2 += v * v;
  }
  const double mean = s / trials;
  const double se = std::sqrt((s2 / trials - mean * mean) / trials);
  EXPECT_NEAR(mean, exact, 5 * se);
}

}  // namespace
}  // namespace airfed::fedsim
