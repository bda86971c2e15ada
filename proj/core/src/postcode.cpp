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

#include "airfed/postcode.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "airfed/error.hpp"

namespace airfed::postcode {

namespace {

constexpr double kClampTol = 1e-12;

using channel::QuantizationGrid;
using channel::TransitionMatrix;

Eigen::MatrixXd interior_block(const TransitionMatrix& p) {
  const auto q = static_cast<Eigen::Index>(p.p.rows());
  Eigen::MatrixXd ps(q - 2, q - 2);
  for (Eigen::Index i = 0; i < q - 2; ++i) {
    for (Eigen::Index j = 0; j < q - 2; ++j) {
      ps(i, j) = p.p(static_cast<std::size_t>(i + 1), static_cast<std::size_t>(j + 1));
    }
  }
  return ps;
}

bool is_exact_identity(const Matrix& m) { return m == Matrix::identity(m.rows()); }

}  // namespace

PostcodeMatrix::PostcodeMatrix(Matrix h, double v_star) : h_(std::move(h)), v_star_(v_star) {
  if (h_.rows() != h_.cols() || h_.rows() == 0) {
    throw InvalidInput("postcode matrix must be square and non-empty");
  }
  for (std::size_t i = 0; i < h_.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < h_.cols(); ++k) {
      double& e = h_(i, k);
      if (!std::isfinite(e) || e < -kClampTol) {
        throw InvalidInput("postcode matrix entry below -1e-12 in row " + std::to_string(i));
      }
      if (e < 0.0) e = 0.0;
      sum += e;
    }
    if (!(sum > 0.0)) throw InvalidInput("postcode matrix row " + std::to_string(i) + " is empty");
    for (std::size_t k = 0; k < h_.cols(); ++k) h_(i, k) /= sum;
  }
  build_tables();
}

PostcodeMatrix PostcodeMatrix::unchecked(Matrix h, double v_star) {
  PostcodeMatrix hm;
  hm.h_ = std::move(h);
  hm.v_star_ = v_star;
  hm.build_tables();
  return hm;
}

void PostcodeMatrix::build_tables() {
  const std::size_t q = h_.rows();
  cdf_ = Matrix(q, q);
  for (std::size_t i = 0; i < q; ++i) {
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t k = 0; k < q; ++k) {
      acc += std::max(h_(i, k), 0.0);
      cdf_(i, k) = acc;
      if (h_(i, k) > 0.0) last = k;
    }
    // Rounding must never leave a gap above the final positive entry.
    for (std::size_t k = last; k < q; ++k) cdf_(i, k) = 1.0;
  }
}

int PostcodeMatrix::sample(int level_index, RngStream& rng) const {
  const double u = rng.uniform();
  const double* row = cdf_.row(static_cast<std::size_t>(level_index));
  const double* end = row + cdf_.cols();
  const double* it = std::upper_bound(row, end, u);
  if (it == end) --it;
  return static_cast<int>(it - row);
}

int apply_postcode(const PostcodeMatrix& hm, int level_index, RngStream& rng) {
  return hm.sample(level_index, rng);
}

LpInstance build_lp(const TransitionMatrix& p, const QuantizationGrid& grid) {
  const int q = grid.q;
  const auto uq = static_cast<std::size_t>(q);
  const auto interior = static_cast<std::size_t>(q - 2);
  LpInstance lp;
  lp.q = q;
  lp.num_vars = uq * uq + 1;
  lp.objective.assign(lp.num_vars, 0.0);
  lp.objective[lp.v_index()] = 1.0;
  lp.lower.assign(lp.num_vars, 0.0);
  lp.upper.assign(lp.num_vars, std::numeric_limits<double>::infinity());

  lp.a_eq = Matrix(uq + interior, lp.num_vars);
  lp.b_eq.assign(uq + interior, 0.0);
  for (int i = 0; i < q; ++i) {
    for (int k = 0; k < q; ++k) lp.a_eq(static_cast<std::size_t>(i), lp.h_index(i, k)) = 1.0;
    lp.b_eq[static_cast<std::size_t>(i)] = 1.0;
  }
  lp.a_ub = Matrix(interior, lp.num_vars);
  lp.b_ub.assign(interior, 0.0);
  for (int j = 1; j < q - 1; ++j) {
    const std::size_t er = uq + static_cast<std::size_t>(j - 1);
    const std::size_t ur = static_cast<std::size_t>(j - 1);
    const double zj = grid.level(j);
    for (int i = 0; i < q; ++i) {
      const double pji = p.p(static_cast<std::size_t>(j), static_cast<std::size_t>(i));
      for (int k = 0; k < q; ++k) {
        const double zk = grid.level(k);
        lp.a_eq(er, lp.h_index(i, k)) = pji * zk;
        lp.a_ub(ur, lp.h_index(i, k)) = pji * (zk - zj) * (zk - zj);
      }
    }
    lp.b_eq[er] = zj;
    lp.a_ub(ur, lp.v_index()) = -1.0;
  }
  return lp;
}

std::optional<PostcodeMatrix> solve_lp(const LpInstance& lp, LpSolution* diagnostics) {
  if (lp.q < 4) throw InvalidInput("solve_lp: instance was not built by build_lp");
  LpSolution sol = solve_simplex(lp);
  if (diagnostics) *diagnostics = sol;
  if (sol.status == LpStatus::Infeasible) return std::nullopt;
  if (sol.status != LpStatus::Optimal || !sol.certified) {
    throw Error("solve_lp: simplex stopped without a certified optimum");
  }
  const auto uq = static_cast<std::size_t>(lp.q);
  Matrix h(uq, uq);
  for (int i = 0; i < lp.q; ++i) {
    for (int k = 0; k < lp.q; ++k) {
      h(static_cast<std::size_t>(i), static_cast<std::size_t>(k)) = sol.x[lp.h_index(i, k)];
    }
  }
  return PostcodeMatrix(std::move(h), std::max(0.0, sol.x[lp.v_index()]));
}

Matrix banded_h(const std::vector<double>& zeta) {
  const std::size_t q = zeta.size() + 2;
  Matrix h(q, q);
  h(0, 0) = 1.0;
  h(q - 1, q - 1) = 1.0;
  for (std::size_t i = 1; i + 1 < q; ++i) {
    const double z = zeta[i - 1];
    h(i, i - 1) = (1.0 - z) / 3.0;
    h(i, i) = 1.0 / 3.0;
    h(i, i + 1) = (1.0 + z) / 3.0;
  }
  return h;
}

double pstar_inverse_norm(const TransitionMatrix& p) {
  const Eigen::MatrixXd ps = interior_block(p);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(ps);
  if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd inv = lu.inverse();
  return inv.cwiseAbs().rowwise().sum().maxCoeff();
}

std::optional<Construction> feasible_construction(const TransitionMatrix& p,
                                                  const QuantizationGrid& grid) {
  const int q = grid.q;
  const Eigen::MatrixXd ps = interior_block(p);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(ps);
  if (!lu.isInvertible()) return std::nullopt;

  Eigen::VectorXd rhs(q - 2);
  for (int j = 1; j < q - 1; ++j) {
    double mean = 0.0;
    for (int k = 0; k < q; ++k) {
      mean += p.p(static_cast<std::size_t>(j), static_cast<std::size_t>(k)) * grid.level(k);
    }
    rhs(j - 1) = grid.level(j) - mean;
  }
  const Eigen::VectorXd zeta = (3.0 / (2.0 * grid.delta)) * lu.solve(rhs);
  const double zinf = zeta.size() ? zeta.cwiseAbs().maxCoeff() : 0.0;
  if (!(zinf <= 1.0)) return std::nullopt;

  Construction c;
  c.zeta.assign(zeta.data(), zeta.data() + zeta.size());
  c.zeta_inf_norm = zinf;
  c.pstar_inverse_norm = lu.inverse().cwiseAbs().rowwise().sum().maxCoeff();
  const PostcodeMatrix provisional(banded_h(c.zeta), 0.0);
  const CertificationReport rep = certify(provisional, p, grid);
  c.hm = PostcodeMatrix(provisional.h(), rep.max_interior_variance);
  return c;
}

CertificationReport certify(const PostcodeMatrix& hm, const TransitionMatrix& p,
                            const QuantizationGrid& grid) {
  const int q = grid.q;
  if (hm.q() != q || static_cast<int>(p.p.rows()) != q) {
    throw InvalidInput("certify: shape mismatch between H, P and grid");
  }
  const Matrix ph = p.p * hm.h();
  CertificationReport rep;
  for (int j = 0; j < q; ++j) {
    LevelCertificate lc;
    lc.level = j;
    lc.interior = j > 0 && j < q - 1;
    const double zj = grid.level(j);
    double mean = 0.0;
    double second = 0.0;
    for (int i = 0; i < q; ++i) {
      const double w = ph(static_cast<std::size_t>(j), static_cast<std::size_t>(i));
      const double zi = grid.level(i);
      mean += w * zi;
      second += w * (zi - zj) * (zi - zj);
    }
    lc.mean = mean;
    lc.variance = second;
    lc.bias = mean - zj;
    if (lc.interior) {
      lc.unbiased_ok = std::fabs(lc.bias) <= kUnbiasTol;
      lc.variance_ok = second <= hm.v_star() + kVarianceTol;
      rep.max_interior_abs_bias = std::max(rep.max_interior_abs_bias, std::fabs(lc.bias));
      rep.max_interior_variance = std::max(rep.max_interior_variance, second);
      rep.ok = rep.ok && lc.unbiased_ok && lc.variance_ok;
    }
    rep.levels.push_back(lc);
  }
  return rep;
}

std::string to_string(PostcodePath path) {
  switch (path) {
    case PostcodePath::Lp:
      return "lp";
    case PostcodePath::Construction:
      return "construction";
    case PostcodePath::Identity:
      return "identity";
  }
  return "unknown";
}

std::optional<Postcode> make_postcode(const QuantizationGrid& grid, double sigma_c) {
  const auto uq = static_cast<std::size_t>(grid.q);
  if (sigma_c == 0.0) {
    return Postcode{PostcodeMatrix(Matrix::identity(uq), 0.0), PostcodePath::Identity,
                    TransitionMatrix{Matrix::identity(uq)}};
  }
  TransitionMatrix p = channel::transition_matrix(grid, sigma_c);
  if (is_exact_identity(p.p)) {
    return Postcode{PostcodeMatrix(Matrix::identity(uq), 0.0), PostcodePath::Identity, p};
  }
  if (auto hm = solve_lp(build_lp(p, grid))) {
    return Postcode{std::move(*hm), PostcodePath::Lp, std::move(p)};
  }
  if (auto c = feasible_construction(p, grid)) {
    return Postcode{std::move(c->hm), PostcodePath::Construction, std::move(p)};
  }
  return std::nullopt;
}

}  // namespace airfed::postcode
