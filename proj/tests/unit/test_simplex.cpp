#include <gtest/gtest.h>

#include <cmath>

#include "airfed/error.hpp"
#include "airfed/rng.hpp"
#include "airfed/simplex.hpp"
#include "oracles.hpp"

namespace airfed::postcode {
namespace {

LpInstance equality_lp(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                       const std::vector<double>& c) {
  LpInstance lp;
  lp.num_vars = c.size();
  lp.objective = c;
  lp.a_eq = Matrix(a.size(), c.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) lp.a_eq(i, j) = a[i][j];
  lp.b_eq = b;
  lp.lower.assign(c.size(), 0.0);
  lp.upper.assign(c.size(), INFINITY);
  return lp;
}

TEST(Simplex, TextbookInequalities) {
  // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18: optimum (2, 6), value 36.
  LpInstance lp;
  lp.num_vars = 2;
  lp.objective = {-3, -5};
  lp.a_ub = Matrix(3, 2);
  lp.a_ub(0, 0) = 1;
  lp.a_ub(1, 1) = 2;
  lp.a_ub(2, 0) = 3;
  lp.a_ub(2, 1) = 2;
  lp.b_ub = {4, 12, 18};
  lp.a_eq = Matrix(0, 2);
  const auto s = solve_simplex(lp);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_TRUE(s.certified);
  EXPECT_NEAR(s.objective, -36.0, 1e-12);
  EXPECT_NEAR(s.x[0], 2.0, 1e-12);
  EXPECT_NEAR(s.x[1], 6.0, 1e-12);
  EXPECT_LE(max_violation(lp, s.x), 1e-12);
}

TEST(Simplex, NegativeRightHandSides) {
  // min x + y s.t. -x - y <= -2, x - y = 0.
  LpInstance lp;
  lp.num_vars = 2;
  lp.objective = {1, 1};
  lp.a_ub = Matrix(1, 2, -1.0);
  lp.b_ub = {-2};
  lp.a_eq = Matrix(1, 2);
  lp.a_eq(0, 0) = 1;
  lp.a_eq(0, 1) = -1;
  lp.b_eq = {0};
  const auto s = solve_simplex(lp);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.x[0], 1.0, 1e-12);
  EXPECT_NEAR(s.x[1], 1.0, 1e-12);
}

TEST(Simplex, Infeasible) {
  const auto lp = equality_lp({{1, 1}, {1, 1}}, {1, 2}, {0, 0});
  EXPECT_EQ(solve_simplex(lp).status, LpStatus::Infeasible);
  const auto neg = equality_lp({{1, 1}}, {-1}, {1, 1});
  EXPECT_EQ(solve_simplex(neg).status, LpStatus::Infeasible);
}

TEST(Simplex, Unbounded) {
  LpInstance lp;
  lp.num_vars = 2;
  lp.objective = {-1, 0};
  lp.a_ub = Matrix(1, 2);
  lp.a_ub(0, 0) = -1;
  lp.a_ub(0, 1) = 1;
  lp.b_ub = {1};
  lp.a_eq = Matrix(0, 2);
  EXPECT_EQ(solve_simplex(lp).status, LpStatus::Unbounded);
}

TEST(Simplex, RedundantRowsAreDropped) {
  const auto lp = equality_lp({{1, 1, 1}, {2, 2, 2}, {1, 0, -1}}, {3, 6, 0}, {1, 2, 3});
  const auto s = solve_simplex(lp);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_TRUE(s.certified);
  EXPECT_EQ(s.dropped_rows, 1u);
  EXPECT_NEAR(s.objective, 6.0, 1e-12);
}

TEST(Simplex, RejectsUnsupportedBounds) {
  auto lp = equality_lp({{1, 1}}, {1}, {1, 1});
  lp.lower[0] = 1.0;
  EXPECT_THROW(solve_simplex(lp), InvalidInput);
}

TEST(Simplex, KleeMintyCube) {
  const int n = 6;
  LpInstance lp;
  lp.num_vars = n;
  lp.objective.assign(n, 0.0);
  lp.a_ub = Matrix(n, n);
  lp.b_ub.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    lp.objective[i] = -std::pow(2.0, n - 1 - i);
    for (int j = 0; j < i; ++j) lp.a_ub(i, j) = std::pow(2.0, i - j + 1);
    lp.a_ub(i, i) = 1.0;
    lp.b_ub[i] = std::pow(5.0, i + 1);
  }
  lp.a_eq = Matrix(0, n);
  const auto s = solve_simplex(lp);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_TRUE(s.certified);
  EXPECT_NEAR(s.objective, -std::pow(5.0, n), 1e-6);
}

TEST(Simplex, MatchesVertexEnumerationOnRandomInstances) {
  RngStream r(11);
  int feasible = 0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t m = 1 + r.below(3), n = m + 1 + r.below(4);
    std::vector<std::vector<double>> a(m, std::vector<double>(n));
    std::vector<double> b(m), c(n);
    for (auto& row : a)
      for (auto& x : row) x = std::round(8.0 * (r.uniform() - 0.3));
    for (auto& x : b) x = std::round(6.0 * (r.uniform() - 0.2));
    for (auto& x : c) x = 1.0 + std::round(5.0 * r.uniform());  // bounded below
    const auto [ok, best] = oracle::brute_force_lp(a, b, c);
    const auto s = solve_simplex(equality_lp(a, b, c));
    // The oracle needs full row rank; rank-deficient draws are skipped.
    if (s.dropped_rows > 0) continue;
    if (!ok) {
      EXPECT_NE(s.status, LpStatus::Optimal) << t;
      continue;
    }
    ++feasible;
    ASSERT_EQ(s.status, LpStatus::Optimal) << t;
    EXPECT_TRUE(s.certified);
    EXPECT_NEAR(s.objective, best, 1e-9 * (1 + std::fabs(best))) << t;
  }
  EXPECT_GT(feasible, 50);
}

}  // namespace
}  // namespace airfed::postcode
