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

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "airfed/matrix.hpp"
#include "airfed/rng.hpp"

namespace airfed::fedsim {

using Vec = std::vector<double>;

/// Constants an objective declares about itself.
struct ObjectiveConstants {
  double mu = 0.0;
  double smoothness = 0.0;
  // Squared constant of the state-dependent moment bound. For objectives that
  // only declare lambda it is 2 lambda L, which turns lambda ||grad F||^2 into
  // a bound in terms of F - F_min.
  double ell_sq = 0.0;
  double lambda = 0.0;
  std::vector<double> sigma_star_sq;
  std::optional<Vec> theta_star;
  std::optional<double> f_min;

  double sigma_star_sq_mean() const;
};

class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::size_t workers() const = 0;

  /// One stochastic gradient of worker j's local loss at theta. All
  /// randomness comes from `rng`.
  virtual void sample_gradient(std::size_t worker, std::span<const double> theta,
                               RngStream& rng, std::span<double> out) const = 0;

  virtual double value(std::span<const double> theta) const = 0;
  virtual void gradient(std::span<const double> theta, std::span<double> out) const = 0;

  /// Held-out 0-1 accuracy, for classification objectives.
  virtual std::optional<double> accuracy(std::span<const double> theta) const;

  const ObjectiveConstants& constants() const noexcept { return constants_; }

 protected:
  ObjectiveConstants constants_;
};

/// Per-worker linear regression: x ~ N(m_j, Sigma), y = <x, theta_dag> + xi,
/// f = (<x, theta> - y)^2 / 2.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(std::size_t d, std::size_t m, double heterogeneity, double noise,
                     RngStream rng);

  std::string kind() const override { return "quadratic"; }
  std::size_t dim() const override { return d_; }
  std::size_t workers() const override { return m_; }
  void sample_gradient(std::size_t worker, std::span<const double> theta, RngStream& rng,
                       std::span<double> out) const override;
  double value(std::span<const double> theta) const override;
  void gradient(std::span<const double> theta, std::span<double> out) const override;

  const Matrix& covariance() const noexcept { return sigma_; }
  const Matrix& pooled_second_moment() const noexcept { return pooled_; }
  const Vec& worker_mean(std::size_t j) const { return means_[j]; }
  const Vec& theta_dagger() const noexcept { return theta_dag_; }
  double noise() const noexcept { return noise_; }

  /// E ||x||^2 x x^T for worker j.
  Matrix fourth_moment(std::size_t j) const;

 private:
  std::size_t d_;
  std::size_t m_;
  double noise_;
  Matrix sigma_;
  Matrix root_;
  Matrix pooled_;
  std::vector<Vec> means_;
  Vec theta_dag_;
};

/// F(theta) = |theta|^2 / 2 + a sum_i cos(b theta_i); worker j observes
/// grad F + o_j + noise * N(0, I) with centred offsets |o_j| = heterogeneity.
class NonconvexObjective final : public Objective {
 public:
  NonconvexObjective(std::size_t d, std::size_t m, double a, double b, double heterogeneity,
                     double noise, RngStream rng);

  std::string kind() const override { return "nonconvex"; }
  std::size_t dim() const override { return d_; }
  std::size_t workers() const override { return m_; }
  void sample_gradient(std::size_t worker, std::span<const double> theta, RngStream& rng,
                       std::span<double> out) const override;
  double value(std::span<const double> theta) const override;
  void gradient(std::span<const double> theta, std::span<double> out) const override;

  const Vec& offset(std::size_t j) const { return offsets_[j]; }

 private:
  std::size_t d_;
  std::size_t m_;
  double a_;
  double b_;
  double noise_;
  std::vector<Vec> offsets_;
};

struct LogisticParams {
  std::size_t d = 20;
  std::size_t m = 10;
  double feature_scale = 0.1;
  double w_norm = 2.0;
  // Per-worker positive-label probabilities span [0.5 - s/2, 0.5 + s/2].
  double label_skew = 0.8;
  std::size_t eval_samples = 2000;
  std::size_t test_samples = 10000;
};

/// Logistic regression on x = s (y w + z), y = +-1, z ~ N(0, I). Loss and
/// gradient are evaluated on a fixed pooled sample, accuracy on a separate
/// held-out pooled sample.
class LogisticObjective final : public Objective {
 public:
  LogisticObjective(const LogisticParams& params, RngStream rng);

  std::string kind() const override { return "logistic"; }
  std::size_t dim() const override { return p_.d; }
  std::size_t workers() const override { return p_.m; }
  void sample_gradient(std::size_t worker, std::span<const double> theta, RngStream& rng,
                       std::span<double> out) const override;
  double value(std::span<const double> theta) const override;
  void gradient(std::span<const double> theta, std::span<double> out) const override;
  std::optional<double> accuracy(std::span<const double> theta) const override;

  double label_probability(std::size_t j) const { return label_p_[j]; }

 private:
  void draw(double p_positive, RngStream& rng, double* x, double& y) const;

  LogisticParams p_;
  Vec w_;
  Vec label_p_;
  Vec eval_x_;
  Vec eval_y_;
  Vec test_x_;
  Vec test_y_;
};

std::shared_ptr<const Objective> make_quadratic_objective(std::size_t d, std::size_t m,
                                                          double heterogeneity, double noise,
                                                          RngStream rng);

std::shared_ptr<const Objective> make_nonconvex_objective(std::size_t d, std::size_t m,
                                                          double a, double b,
                                                          double heterogeneity, double noise,
                                                          RngStream rng);

std::shared_ptr<const Objective> make_logistic_objective(const LogisticParams& params,
                                                         RngStream rng);

/// Minimum of t^2 / 2 + a cos(b t) over the reals.
double cosine_well_minimum(double a, double b);

}  // namespace airfed::fedsim
