#include <gtest/gtest.h>

#include <cmath>

#include "airfed/error.hpp"
#include "airfed/objective.hpp"
#include "oracles.hpp"

namespace airfed::fedsim {
namespace {

Vec random_point(std::size_t d, RngStream& r, double scale) {
  Vec v(d);
  for (auto& x : v) x = scale * r.normal();
  return v;
}

void expect_gradient_matches_differences(const Objective& obj, const Vec& theta, double tol) {
  Vec g(obj.dim());
  obj.gradient(theta, g);
  for (std::size_t i = 0; i < obj.dim(); ++i) {
    Vec up = theta, dn = theta;
    const double h = 1e-5;
    up[i] += h;
    dn[i] -= h;
    const double fd = (obj.value(up) - obj.value(dn)) / (2 * h);
    EXPECT_NEAR(g[i], fd, tol * (1 + std::fabs(fd))) << i;
  }
}

// Mean over workers and draws of the stochastic gradient, with its standard
// error per coordinate.
std::pair<Vec, Vec> mean_sample_gradient(const Objective& obj, const Vec& theta, int draws) {
  const std::size_t d = obj.dim(), m = obj.workers();
  Vec s(d, 0.0), s2(d, 0.0), g(d);
  RngStream r(77);
  for (int t = 0; t < draws; ++t) {
    for (std::size_t j = 0; j < m; ++j) {
      RngStream rj = r.child({static_cast<std::uint64_t>(t), j});
      obj.sample_gradient(j, theta, rj, g);
      for (std::size_t i = 0; i < d; ++i) {
        s[i] += g[i] / m;
        s2[i] += g[i] * g[i] / m;
      }
    }
  }
  Vec se(d);
  for (std::size_t i = 0; i < d; ++i) {
    s[i] /= draws;
    se[i] = std::sqrt((s2[i] / draws - s[i] * s[i]) / (draws * double(m)));
  }
  return {s, se};
}

TEST(Quadratic, GradientAndMinimizer) {
  const auto obj = make_quadratic_objective(8, 4, 0.5, 1.0, RngStream(1));
  RngStream r(2);
  expect_gradient_matches_differences(*obj, random_point(8, r, 1.0), 1e-6);
  const auto& k = obj->constants();
  ASSERT_TRUE(k.theta_star.has_value());
  Vec g(8);
  obj->gradient(*k.theta_star, g);
  for (const double x : g) EXPECT_NEAR(x, 0.0, 1e-14);
  EXPECT_NEAR(obj->value(*k.theta_star), *k.f_min, 1e-14);
}

TEST(Quadratic, CurvatureConstantsMatchJacobiEigenvalues) {
  const auto obj = make_quadratic_objective(6, 3, 0.8, 1.0, RngStream(3));
  const auto& q = dynamic_cast<const QuadraticObjective&>(*obj);
  std::vector<std::vector<double>> a(6, std::vector<double>(6));
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) a[i][j] = q.pooled_second_moment()(i, j);
  const auto ev = oracle::symmetric_eigenvalues(a);
  EXPECT_NEAR(obj->constants().mu, ev.front(), 1e-12);
  EXPECT_NEAR(obj->constants().smoothness, ev.back(), 1e-12);
  // Covariance spectrum is [0.5, 1.5] by construction.
  std::vector<std::vector<double>> s(6, std::vector<double>(6));
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) s[i][j] = q.covariance()(i, j);
  const auto es = oracle::symmetric_eigenvalues(s);
  EXPECT_NEAR(es.front(), 0.5, 1e-12);
  EXPECT_NEAR(es.back(), 1.5, 1e-12);
}

TEST(Quadratic, StochasticGradientIsUnbiased) {
  const auto obj = make_quadratic_objective(5, 3, 0.5, 0.7, RngStream(4));
  RngStream r(5);
  const Vec theta = random_point(5, r, 1.0);
  const auto [mean, se] = mean_sample_gradient(*obj, theta, 100000);
  Vec g(5);
  obj->gradient(theta, g);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(mean[i], g[i], 5 * se[i]);
}

TEST(Quadratic, NoiseAtOptimumMatchesDeclaredSigmaStar) {
  const auto obj = make_quadratic_objective(4, 2, 0.6, 0.9, RngStream(6));
  const auto& k = obj->constants();
  Vec g(4);
  for (std::size_t j = 0; j < 2; ++j) {
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int t = 0; t < n; ++t) {
      RngStream rj = RngStream(8).child({std::uint64_t(t), j});
      obj->sample_gradient(j, *k.theta_star, rj, g);
      double v = 0;
      for (const double x : g) v += x * x;
      s += v;
      s2 += v * v;
    }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, k.sigma_star_sq[j], 5 * se);
  }
}

TEST(Quadratic, FourthMomentMatchesMonteCarlo) {
  const auto obj = make_quadratic_objective(3, 2, 0.7, 1.0, RngStream(9));
  const auto& q = dynamic_cast<const QuadraticObjective&>(*obj);
  // Without label noise and with theta - theta_dag = e_i the gradient is
  // x x_i, so E |g|^2 = E |x|^2 x_i^2, a diagonal entry of E |x|^2 x x^T.
  const auto twin = make_quadratic_objective(3, 2, 0.7, 0.0, RngStream(9));
  const Matrix k = q.fourth_moment(1);
  for (std::size_t i = 0; i < 3; ++i) {
    Vec theta = q.theta_dagger();
    theta[i] += 1.0;
    Vec g(3);
    double s = 0, s2 = 0;
    const int n = 400000;
    for (int t = 0; t < n; ++t) {
      RngStream rj = RngStream(10).child(t);
      twin->sample_gradient(1, theta, rj, g);
      double v = 0;
      for (const double x : g) v += x * x;
      s += v;
      s2 += v * v;
    }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, k(i, i), 5 * se) << i;
  }
}

TEST(Quadratic, StateDependentNoiseBound) {
  // E |g_j(theta) - g_j(theta*)|^2 <= ell^2 (F(theta) - F*) for every worker.
  const auto obj = make_quadratic_objective(4, 3, 0.5, 1.0, RngStream(11));
  const auto& k = obj->constants();
  RngStream r(12);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec theta = random_point(4, r, 1.0);
    const double gap = obj->value(theta) - *k.f_min;
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0;
      const int n = 20000;
      Vec g1(4), g0(4);
      for (int t = 0; t < n; ++t) {
        RngStream a = RngStream(13).child({std::uint64_t(t), j});
        RngStream b = a;
        obj->sample_gradient(j, theta, a, g1);
        obj->sample_gradient(j, *k.theta_star, b, g0);
        for (std::size_t i = 0; i < 4; ++i) s += (g1[i] - g0[i]) * (g1[i] - g0[i]);
      }
      EXPECT_LE(s / n, 1.05 * k.ell_sq * gap);
    }
  }
}

TEST(Quadratic, ObjectiveSeedFixesGeometry) {
  const auto a = make_quadratic_objective(6, 3, 0.5, 1.0, RngStream(20));
  const auto b = make_quadratic_objective(6, 6, 0.5, 0.0, RngStream(20));
  const auto& qa = dynamic_cast<const QuadraticObjective&>(*a);
  const auto& qb = dynamic_cast<const QuadraticObjective&>(*b);
  EXPECT_EQ(qa.covariance(), qb.covariance());
  EXPECT_EQ(qa.theta_dagger(), qb.theta_dagger());
  EXPECT_EQ(qa.worker_mean(2), qb.worker_mean(2));
  for (const double s : b->constants().sigma_star_sq) EXPECT_EQ(s, 0.0);
}

TEST(Nonconvex, GradientSmoothnessAndMinimum) {
  const auto obj = make_nonconvex_objective(5, 3, 0.5, 2.0, 0.4, 1.0, RngStream(30));
  RngStream r(31);
  expect_gradient_matches_differences(*obj, random_point(5, r, 2.0), 1e-6);
  EXPECT_EQ(obj->constants().smoothness, 3.0);
  // Grid search oracle for the one-dimensional well.
  double best = INFINITY;
  for (int s = -400000; s <= 400000; ++s) {
    const double t = s * 1e-5;
    best = std::min(best, 0.5 * t * t + 0.5 * std::cos(2.0 * t));
  }
  EXPECT_NEAR(cosine_well_minimum(0.5, 2.0), best, 1e-9);
  EXPECT_LE(cosine_well_minimum(0.5, 2.0), best);
  EXPECT_NEAR(*obj->constants().f_min, 5 * cosine_well_minimum(0.5, 2.0), 1e-12);
  for (int t = 0; t < 1000; ++t) EXPECT_GE(obj->value(random_point(5, r, 2.0)), *obj->constants().f_min);
}

TEST(Nonconvex, OffsetsCentredAndGradientUnbiased) {
  const auto obj = make_nonconvex_objective(4, 5, 0.5, 2.0, 0.8, 1.0, RngStream(32));
  const auto& nc = dynamic_cast<const NonconvexObjective&>(*obj);
  for (std::size_t i = 0; i < 4; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < 5; ++j) s += nc.offset(j)[i];
    EXPECT_NEAR(s, 0.0, 1e-14);
  }
  RngStream r(33);
  const Vec theta = random_point(4, r, 1.0);
  const auto [mean, se] = mean_sample_gradient(*obj, theta, 50000);
  Vec g(4);
  obj->gradient(theta, g);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(mean[i], g[i], 5 * se[i]);
}

TEST(Logistic, GradientAccuracyAndLabelSkew) {
  LogisticParams p;
  p.d = 6;
  p.m = 4;
  p.eval_samples = 500;
  p.test_samples = 500;
  const auto obj = make_logistic_objective(p, RngStream(40));
  RngStream r(41);
  expect_gradient_matches_differences(*obj, random_point(6, r, 1.0), 1e-6);
  const auto acc = obj->accuracy(Vec(6, 0.0));
  ASSERT_TRUE(acc.has_value());
  EXPECT_GE(*acc, 0.0);
  EXPECT_LE(*acc, 1.0);
  const auto& lo = dynamic_cast<const LogisticObjective&>(*obj);
  EXPECT_NEAR(lo.label_probability(0), 0.1, 1e-15);
  EXPECT_NEAR(lo.label_probability(3), 0.9, 1e-15);
  EXPECT_FALSE(make_quadratic_objective(3, 2, 0, 1, RngStream(1))->accuracy(Vec(3, 0.0)));
}

TEST(Objectives, RejectInvalidParameters) {
  EXPECT_THROW(make_quadratic_objective(0, 2, 0, 1, RngStream(1)), InvalidInput);
  EXPECT_THROW(make_quadratic_objective(3, 2, -1, 1, RngStream(1)), InvalidInput);
  EXPECT_THROW(make_nonconvex_objective(3, 0, 0.5, 2, 0, 1, RngStream(1)), InvalidInput);
  LogisticParams p;
  p.feature_scale = 0.0;
  EXPECT_THROW(make_logistic_objective(p, RngStream(1)), InvalidInput);
}

}  // namespace
}  // namespace airfed::fedsim
