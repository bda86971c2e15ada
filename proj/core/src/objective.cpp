// Copyright 2026 The airfed Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "airfed/objective.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "airfed/error.hpp"

namespace airfed::fedsim {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd to_eigen(const Matrix& m) {
  MatrixXd e(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
    }
  }
  return e;
}

Matrix from_eigen(const MatrixXd& e) {
  Matrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    for (Eigen::Index j = 0; j < e.cols(); ++j) {
      m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = e(i, j);
    }
  }
  return m;
}

Vec random_unit(std::size_t d, RngStream& rng) {
  Vec v(d);
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      n2 += x * x;
    }
  } while (n2 == 0.0);
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& x : v) x *= inv;
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// log(1 + e^t) without overflow.
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

// 1 / (1 + e^{-t}) without overflow.
double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void require_sizes(std::size_t d, std::size_t m) {
  if (d == 0 || m == 0) throw InvalidInput("objective: d and m must be at least 1");
}

}  // namespace

double ObjectiveConstants::sigma_star_sq_mean() const {
  if (sigma_star_sq.empty()) return 0.0;
  double s = 0.0;
  for (const double v : sigma_star_sq) s += v;
  return s / static_cast<double>(sigma_star_sq.size());
}

std::optional<double> Objective::accuracy(std::span<const double>) const { return std::nullopt; }

// ---------------------------------------------------------------- quadratic

QuadraticObjective::QuadraticObjective(std::size_t d, std::size_t m, double heterogeneity,
                                       double noise, RngStream rng)
    : d_(d), m_(m), noise_(noise) {
  require_sizes(d, m);
  if (!(noise >= 0.0) || !(heterogeneity >= 0.0)) {
    throw InvalidInput("quadratic objective: noise and heterogeneity must be >= 0");
  }
  const auto n = static_cast<Eigen::Index>(d);

  RngStream basis_rng = rng.child(1);
  MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = basis_rng.normal();
  }
  const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(g).householderQ();
  VectorXd spectrum(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    spectrum(i) = d == 1 ? 1.0 : 0.5 + static_cast<double>(i) / static_cast<double>(d - 1);
  }
  const MatrixXd sigma = q * spectrum.asDiagonal() * q.transpose();
  const MatrixXd root = q * spectrum.cwiseSqrt().asDiagonal() * q.transpose();
  sigma_ = from_eigen(0.5 * (sigma + sigma.transpose()));
  root_ = from_eigen(0.5 * (root + root.transpose()));

  RngStream mean_rng = rng.child(2);
  means_.resize(m);
  MatrixXd pooled = to_eigen(sigma_);
  for (std::size_t j = 0; j < m; ++j) {
    means_[j] = random_unit(d, mean_rng);
    for (auto& x : means_[j]) x *= heterogeneity;
    const Eigen::Map<const VectorXd> mj(means_[j].data(), n);
    pooled += mj * mj.transpose() / static_cast<double>(m);
  }
  pooled_ = from_eigen(pooled);

  RngStream theta_rng = rng.child(3);
  theta_dag_.resize(d);
  for (auto& x : theta_dag_) x = theta_rng.normal() / std::sqrt(static_cast<double>(d));

  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(pooled);
  constants_.mu = es.eigenvalues().minCoeff();
  constants_.smoothness = es.eigenvalues().maxCoeff();

  const double tr = sigma.trace();
  double ell_sq = 0.0;
  constants_.sigma_star_sq.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const MatrixXd k = to_eigen(fourth_moment(j));
    const Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(k, pooled);
    ell_sq = std::max(ell_sq, 2.0 * ges.eigenvalues().maxCoeff());
    double mn = 0.0;
    for (const double x : means_[j]) mn += x * x;
    constants_.sigma_star_sq[j] = noise * noise * (tr + mn);
  }
  constants_.ell_sq = ell_sq;
  constants_.lambda = 0.0;
  constants_.theta_star = theta_dag_;
  constants_.f_min = 0.5 * noise * noise;
}

Matrix QuadraticObjective::fourth_moment(std::size_t j) const {
  const auto n = static_cast<Eigen::Index>(d_);
  const MatrixXd s = to_eigen(sigma_);
  const Eigen::Map<const VectorXd> a(means_[j].data(), n);
  const MatrixXd aa = a * a.transpose();
  const double an = a.squaredNorm();
  const double tr = s.trace();
  const MatrixXd k = an * aa + an * s + 2.0 * (aa * s + s * aa) + tr * aa + tr * s + 2.0 * s * s;
  return from_eigen(0.5 * (k + k.transpose()));
}

void QuadraticObjective::sample_gradient(std::size_t worker, std::span<const double> theta,
                                         RngStream& rng, std::span<double> out) const {
  thread_local Vec z;
  z.resize(d_);
  for (auto& v : z) v = rng.normal();
  const double xi = noise_ * rng.normal();
  const Vec& mj = means_[worker];
  double resid = -xi;
  for (std::size_t i = 0; i < d_; ++i) {
    const double* r = root_.row(i);
    double xi_i = mj[i];
    for (std::size_t k = 0; k < d_; ++k) xi_i += r[k] * z[k];
    out[i] = xi_i;
    resid += xi_i * (theta[i] - theta_dag_[i]);
  }
  for (std::size_t i = 0; i < d_; ++i) out[i] *= resid;
}

double QuadraticObjective::value(std::span<const double> theta) const {
  double q = 0.0;
  for (std::size_t i = 0; i < d_; ++i) {
    const double ai = theta[i] - theta_dag_[i];
    double row = 0.0;
    for (std::size_t k = 0; k < d_; ++k) row += pooled_(i, k) * (theta[k] - theta_dag_[k]);
    q += ai * row;
  }
  return 0.5 * q + 0.5 * noise_ * noise_;
}

void QuadraticObjective::gradient(std::span<const double> theta, std::span<double> out) const {
  for (std::size_t i = 0; i < d_; ++i) {
    double row = 0.0;
    for (std::size_t k = 0; k < d_; ++k) row += pooled_(i, k) * (theta[k] - theta_dag_[k]);
    out[i] = row;
  }
}

// ---------------------------------------------------------------- nonconvex

double cosine_well_minimum(double a, double b) {
  if (a == 0.0 || b == 0.0) return std::min(0.0, a);
  // Stationary points satisfy |t| = |a b sin(b t)| <= |a b|.
  const double reach = std::fabs(a * b) + 1e-9;
  const auto phi = [&](double t) { return 0.5 * t * t + a * std::cos(b * t); };
  const int steps = 200000;
  double best_t = 0.0;
  double best = phi(0.0);
  for (int s = 0; s <= steps; ++s) {
    const double t = -reach + 2.0 * reach * s / steps;
    const double v = phi(t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  for (int it = 0; it < 50; ++it) {
    const double g = best_t - a * b * std::sin(b * best_t);
    const double h = 1.0 - a * b * b * std::cos(b * best_t);
    if (!(h > 0.0)) break;
    const double next = best_t - g / h;
    if (phi(next) > best + 1e-15) break;
    best_t = next;
    best = std::min(best, phi(next));
  }
  return best;
}

NonconvexObjective::NonconvexObjective(std::size_t d, std::size_t m, double a, double b,
                                       double heterogeneity, double noise, RngStream rng)
    : d_(d), m_(m), a_(a), b_(b), noise_(noise) {
  require_sizes(d, m);
  if (!(noise >= 0.0) || !(heterogeneity >= 0.0)) {
    throw InvalidInput("nonconvex objective: noise and heterogeneity must be >= 0");
  }
  RngStream off_rng = rng.child(1);
  offsets_.assign(m, Vec(d, 0.0));
  if (heterogeneity > 0.0 && m > 1) {
    Vec mean(d, 0.0);
    for (auto& o : offsets_) {
      o = random_unit(d, off_rng);
      for (std::size_t i = 0; i < d; ++i) {
        o[i] *= heterogeneity;
        mean[i] += o[i] / static_cast<double>(m);
      }
    }
    for (auto& o : offsets_) {
      for (std::size_t i = 0; i < d; ++i) o[i] -= mean[i];
    }
  }
  constants_.mu = 0.0;
  constants_.smoothness = 1.0 + std::fabs(a) * b * b;
  bool any_offset = false;
  constants_.sigma_star_sq.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    double on = 0.0;
    for (const double x : offsets_[j]) on += x * x;
    any_offset = any_offset || on > 0.0;
    constants_.sigma_star_sq[j] = noise * noise * static_cast<double>(d);
    if (on > 0.0) constants_.sigma_star_sq[j] += 2.0 * on;
  }
  // E|g|^2 = |grad F|^2 + 2<grad F, o_j> + |o_j|^2 + noise^2 d; Young's
  // inequality on the cross term costs a factor 2 when offsets are present.
  constants_.lambda = any_offset ? 2.0 : 1.0;
  constants_.ell_sq = 2.0 * constants_.lambda * constants_.smoothness;
  constants_.f_min = static_cast<double>(d) * cosine_well_minimum(a, b);
}

void NonconvexObjective::sample_gradient(std::size_t worker, std::span<const double> theta,
                                         RngStream& rng, std::span<double> out) const {
  gradient(theta, out);
  const Vec& o = offsets_[worker];
  for (std::size_t i = 0; i < d_; ++i) out[i] += o[i] + noise_ * rng.normal();
}

double NonconvexObjective::value(std::span<const double> theta) const {
  double s = 0.0;
  for (std::size_t i = 0; i < d_; ++i) s += 0.5 * theta[i] * theta[i] + a_ * std::cos(b_ * theta[i]);
  return s;
}

void NonconvexObjective::gradient(std::span<const double> theta, std::span<double> out) const {
  for (std::size_t i = 0; i < d_; ++i) out[i] = theta[i] - a_ * b_ * std::sin(b_ * theta[i]);
}

// ---------------------------------------------------------------- logistic

LogisticObjective::LogisticObjective(const LogisticParams& params, RngStream rng) : p_(params) {
  require_sizes(p_.d, p_.m);
  if (!(p_.feature_scale > 0.0) || !(p_.w_norm >= 0.0) || !(p_.label_skew >= 0.0) ||
      p_.label_skew > 1.0 || p_.eval_samples == 0 || p_.test_samples == 0) {
    throw InvalidInput("logistic objective: invalid parameters");
  }
  RngStream w_rng = rng.child(1);
  w_ = random_unit(p_.d, w_rng);
  for (auto& x : w_) x *= p_.w_norm;
  label_p_.resize(p_.m);
  for (std::size_t j = 0; j < p_.m; ++j) {
    const double t = p_.m == 1 ? 0.5 : static_cast<double>(j) / static_cast<double>(p_.m - 1);
    label_p_[j] = 0.5 + p_.label_skew * (t - 0.5);
  }
  const auto fill = [&](std::size_t count, RngStream s, Vec& xs, Vec& ys) {
    xs.resize(count * p_.d);
    ys.resize(count);
    for (std::size_t n = 0; n < count; ++n) {
      // Pooled distribution: a uniformly chosen worker's local law.
      const std::size_t j = static_cast<std::size_t>(s.below(p_.m));
      draw(label_p_[j], s, xs.data() + n * p_.d, ys[n]);
    }
  };
  fill(p_.eval_samples, rng.child(2), eval_x_, eval_y_);
  fill(p_.test_samples, rng.child(3), test_x_, test_y_);

  const double s2 = p_.feature_scale * p_.feature_scale;
  const double wn = p_.w_norm * p_.w_norm;
  constants_.mu = 0.0;
  constants_.smoothness = s2 * (wn + 1.0) / 4.0;
  constants_.lambda = 0.0;
  constants_.ell_sq = 0.0;
  constants_.sigma_star_sq.assign(p_.m, s2 * (wn + static_cast<double>(p_.d)));
}

void LogisticObjective::draw(double p_positive, RngStream& rng, double* x, double& y) const {
  y = rng.uniform() < p_positive ? 1.0 : -1.0;
  for (std::size_t i = 0; i < p_.d; ++i) x[i] = p_.feature_scale * (y * w_[i] + rng.normal());
}

void LogisticObjective::sample_gradient(std::size_t worker, std::span<const double> theta,
                                        RngStream& rng, std::span<double> out) const {
  double y = 0.0;
  draw(label_p_[worker], rng, out.data(), y);
  const double margin = y * dot(theta, std::span<const double>(out.data(), p_.d));
  const double scale = -y * sigmoid(-margin);
  for (std::size_t i = 0; i < p_.d; ++i) out[i] *= scale;
}

double LogisticObjective::value(std::span<const double> theta) const {
  double s = 0.0;
  for (std::size_t n = 0; n < eval_y_.size(); ++n) {
    const std::span<const double> x(eval_x_.data() + n * p_.d, p_.d);
    s += softplus(-eval_y_[n] * dot(theta, x));
  }
  return s / static_cast<double>(eval_y_.size());
}

void LogisticObjective::gradient(std::span<const double> theta, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t n = 0; n < eval_y_.size(); ++n) {
    const double* x = eval_x_.data() + n * p_.d;
    const double y = eval_y_[n];
    const double scale = -y * sigmoid(-y * dot(theta, std::span<const double>(x, p_.d)));
    for (std::size_t i = 0; i < p_.d; ++i) out[i] += scale * x[i];
  }
  for (auto& v : out) v /= static_cast<double>(eval_y_.size());
}

std::optional<double> LogisticObjective::accuracy(std::span<const double> theta) const {
  std::size_t correct = 0;
  for (std::size_t n = 0; n < test_y_.size(); ++n) {
    const double s = dot(theta, std::span<const double>(test_x_.data() + n * p_.d, p_.d));
    const double pred = s > 0.0 ? 1.0 : -1.0;
    correct += pred == test_y_[n] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(test_y_.size());
}

// ---------------------------------------------------------------- factories

std::shared_ptr<const Objective> make_quadratic_objective(std::size_t d, std::size_t m,
                                                          double heterogeneity, double noise,
                                                          RngStream rng) {
  return std::make_shared<QuadraticObjective>(d, m, heterogeneity, noise, rng);
}

std::shared_ptr<const Objective> make_nonconvex_objective(std::size_t d, std::size_t m,
                                                          double a, double b,
                                                          double heterogeneity, double noise,
                                                          RngStream rng) {
  return std::make_shared<NonconvexObjective>(d, m, a, b, heterogeneity, noise, rng);
}

std::shared_ptr<const Objective> make_logistic_objective(const LogisticParams& params,
                                                         RngStream rng) {
  return std::make_shared<LogisticObjective>(params, rng);
}

}  // namespace airfed::fedsim
