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

#include "airfed/simplex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "airfed/error.hpp"

namespace airfed::postcode {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kRelPivot = 1e-9;
constexpr std::size_t kStallLimit = 50;
constexpr double kCostTol = 1e-10;
constexpr double kPhaseOneTol = 1e-9;
constexpr double kCleanTol = 1e-12;
constexpr double kCertifyTol = 1e-9;
constexpr double kTieTol = 1e-12;
constexpr std::size_t kMaxIterations = 200000;

using Eigen::Index;

// Revised simplex on min c^T x, A x = b, x >= 0 with b >= 0. The basis is
// refactored from the original data every iteration, so rounding error never
// accumulates across pivots.
class Revised {
 public:
  Revised(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, std::vector<std::size_t> basis)
      : a_(a), b_(b), basis_(std::move(basis)), is_basic_(static_cast<std::size_t>(a.cols()), 0) {
    rows_.resize(static_cast<std::size_t>(a.rows()));
    for (std::size_t r = 0; r < rows_.size(); ++r) rows_[r] = r;
    for (const auto j : basis_) is_basic_[j] = 1;
  }

  const std::vector<std::size_t>& rows() const { return rows_; }
  const std::vector<std::size_t>& basis() const { return basis_; }
  const Eigen::VectorXd& xb() const { return xb_; }

  void factor(const std::vector<double>& c, bool clamp = true) {
    const auto k = static_cast<Index>(rows_.size());
    Eigen::MatrixXd bm(k, k);
    Eigen::VectorXd rb(k), cb(k);
    for (Index i = 0; i < k; ++i) {
      const auto ri = static_cast<Index>(rows_[static_cast<std::size_t>(i)]);
      rb(i) = b_(ri);
      for (Index col = 0; col < k; ++col) {
        bm(i, col) = a_(ri, static_cast<Index>(basis_[static_cast<std::size_t>(col)]));
      }
    }
    for (Index col = 0; col < k; ++col) cb(col) = c[basis_[static_cast<std::size_t>(col)]];
    lu_.compute(bm);
    xb_ = lu_.solve(rb);
    for (Index i = 0; clamp && i < k; ++i) {
      if (xb_(i) < 0.0 && xb_(i) > -kPhaseOneTol) xb_(i) = 0.0;
    }
    y_ = lu_.transpose().solve(cb);
  }

  double reduced_cost(const std::vector<double>& c, std::size_t j) const {
    double d = c[j];
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      d -= y_(static_cast<Index>(i)) * a_(static_cast<Index>(rows_[i]), static_cast<Index>(j));
    }
    return d;
  }

  Eigen::VectorXd column(std::size_t j) const {
    Eigen::VectorXd col(static_cast<Index>(rows_.size()));
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      col(static_cast<Index>(i)) = a_(static_cast<Index>(rows_[i]), static_cast<Index>(j));
    }
    return col;
  }

  // B^{-1} a_j at the current factorization.
  Eigen::VectorXd direction(std::size_t j) const { return lu_.solve(column(j)); }

  // Row i of B^{-1}.
  Eigen::VectorXd inverse_row(std::size_t i) const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Index>(rows_.size()));
    e(static_cast<Index>(i)) = 1.0;
    return lu_.transpose().solve(e);
  }

  void replace(std::size_t pos, std::size_t var) {
    is_basic_[basis_[pos]] = 0;
    basis_[pos] = var;
    is_basic_[var] = 1;
  }

  void drop(std::size_t pos, std::size_t row) {
    is_basic_[basis_[pos]] = 0;
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(pos));
    rows_.erase(std::find(rows_.begin(), rows_.end(), row));
  }

  bool basic(std::size_t j) const { return is_basic_[j] != 0; }

  LpStatus optimize(const std::vector<double>& c, const std::vector<char>& allowed,
                    std::size_t& iterations) {
    const std::size_t cols = static_cast<std::size_t>(a_.cols());
    // Dantzig pricing with largest-pivot ties while the objective moves;
    // after a run of degenerate pivots fall back to Bland's rule, which
    // cannot cycle, until the objective improves again.
    std::size_t stalled = 0;
    double last_obj = INFINITY;
    while (true) {
      if (iterations >= kMaxIterations) return LpStatus::IterationLimit;
      factor(c);
      double obj = 0.0;
      for (std::size_t i = 0; i < basis_.size(); ++i) obj += c[basis_[i]] * xb_(static_cast<Index>(i));
      if (obj < last_obj - kCostTol * std::max(1.0, std::fabs(last_obj))) {
        stalled = 0;
        last_obj = obj;
      } else {
        ++stalled;
      }
      const bool bland = stalled > kStallLimit;

      std::size_t enter = cols;
      double most = -kCostTol;
      for (std::size_t j = 0; j < cols; ++j) {
        if (!allowed[j] || is_basic_[j]) continue;
        const double rc = reduced_cost(c, j);
        if (rc < most) {
          most = rc;
          enter = j;
          if (bland) break;
        }
      }
      if (enter == cols) return LpStatus::Optimal;

      const Eigen::VectorXd d = direction(enter);
      const double floor = std::max(kPivotTol, kRelPivot * d.cwiseAbs().maxCoeff());
      const auto k = static_cast<std::size_t>(d.size());
      double best = INFINITY;
      for (std::size_t i = 0; i < k; ++i) {
        const double di = d(static_cast<Index>(i));
        if (di > floor) best = std::min(best, xb_(static_cast<Index>(i)) / di);
      }
      if (!std::isfinite(best)) return LpStatus::Unbounded;
      std::size_t leave = k;
      for (std::size_t i = 0; i < k; ++i) {
        const double di = d(static_cast<Index>(i));
        if (di <= floor || xb_(static_cast<Index>(i)) / di > best + kTieTol) continue;
        if (leave == k) {
          leave = i;
        } else if (bland ? basis_[i] < basis_[leave] : di > d(static_cast<Index>(leave))) {
          leave = i;
        }
      }
      replace(leave, enter);
      ++iterations;
    }
  }

  // Dual simplex passes that remove the small primal infeasibilities left by
  // skipped tiny pivots, keeping reduced costs nonnegative. Returns false when
  // a negative basic variable cannot be pivoted out.
  bool restore_primal(const std::vector<double>& c, const std::vector<char>& allowed,
                      std::size_t& iterations) {
    const std::size_t cols = static_cast<std::size_t>(a_.cols());
    while (iterations < kMaxIterations) {
      factor(c, false);
      Index worst = 0;
      const double lowest = xb_.size() ? xb_.minCoeff(&worst) : 0.0;
      if (lowest >= -kCleanTol) return true;
      const Eigen::VectorXd w = inverse_row(static_cast<std::size_t>(worst));
      std::size_t enter = cols;
      double best = INFINITY;
      double alpha_max = 0.0;
      std::vector<double> alpha(cols, 0.0);
      for (std::size_t j = 0; j < cols; ++j) {
        if (!allowed[j] || is_basic_[j]) continue;
        alpha[j] = w.dot(column(j));
        alpha_max = std::max(alpha_max, std::fabs(alpha[j]));
      }
      const double floor = std::max(kPivotTol, kRelPivot * alpha_max);
      for (std::size_t j = 0; j < cols; ++j) {
        if (!allowed[j] || is_basic_[j] || alpha[j] >= -floor) continue;
        const double ratio = std::max(0.0, reduced_cost(c, j)) / -alpha[j];
        if (ratio < best - kTieTol ||
            (ratio <= best + kTieTol && enter < cols && -alpha[j] > -alpha[enter])) {
          best = std::min(best, ratio);
          enter = j;
        }
      }
      if (enter == cols) return false;
      replace(static_cast<std::size_t>(worst), enter);
      ++iterations;
    }
    return false;
  }

 private:
  const Eigen::MatrixXd& a_;
  const Eigen::VectorXd& b_;
  std::vector<std::size_t> rows_;
  std::vector<std::size_t> basis_;
  std::vector<char> is_basic_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::VectorXd xb_;
  Eigen::VectorXd y_;
};

}  // namespace

LpSolution solve_simplex(const LpInstance& lp) {
  const std::size_t n = lp.num_vars;
  const std::size_t me = lp.b_eq.size();
  const std::size_t mu = lp.b_ub.size();
  if (lp.objective.size() != n || (me && lp.a_eq.cols() != n) || lp.a_eq.rows() != me ||
      (mu && lp.a_ub.cols() != n) || lp.a_ub.rows() != mu) {
    throw InvalidInput("solve_simplex: inconsistent instance dimensions");
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = j < lp.lower.size() ? lp.lower[j] : 0.0;
    const double hi = j < lp.upper.size() ? lp.upper[j] : INFINITY;
    if (lo != 0.0 || !std::isinf(hi) || hi < 0) {
      throw InvalidInput("solve_simplex: only x >= 0 bounds are supported");
    }
  }

  const std::size_t m = me + mu;
  // Standard form: rows flipped so that b >= 0, a slack per inequality row,
  // and an artificial for every row whose slack cannot start basic.
  std::vector<char> needs_artificial(m, 1);
  std::vector<double> sign(m, 1.0);
  for (std::size_t r = 0; r < m; ++r) {
    const bool eq = r < me;
    const double rb = eq ? lp.b_eq[r] : lp.b_ub[r - me];
    sign[r] = rb < 0.0 ? -1.0 : 1.0;
    if (!eq) needs_artificial[r] = sign[r] < 0.0;
  }
  std::size_t n_art = 0;
  for (const char f : needs_artificial) n_art += f ? 1 : 0;
  const std::size_t base_cols = n + mu;
  const std::size_t cols = base_cols + n_art;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Index>(m), static_cast<Index>(cols));
  Eigen::VectorXd b(static_cast<Index>(m));
  std::vector<std::size_t> basis(m);
  std::vector<std::size_t> art_row(cols, m);
  {
    std::size_t next_art = base_cols;
    for (std::size_t r = 0; r < m; ++r) {
      const bool eq = r < me;
      const double* src = eq ? lp.a_eq.row(r) : lp.a_ub.row(r - me);
      const auto ri = static_cast<Index>(r);
      for (std::size_t j = 0; j < n; ++j) a(ri, static_cast<Index>(j)) = sign[r] * src[j];
      if (!eq) a(ri, static_cast<Index>(n + (r - me))) = sign[r];
      b(ri) = sign[r] * (eq ? lp.b_eq[r] : lp.b_ub[r - me]);
      if (needs_artificial[r]) {
        a(ri, static_cast<Index>(next_art)) = 1.0;
        art_row[next_art] = r;
        basis[r] = next_art++;
      } else {
        basis[r] = n + (r - me);
      }
    }
  }

  LpSolution sol;
  Revised rs(a, b, basis);
  std::vector<char> allowed(cols, 1);

  std::vector<double> phase_one_cost(cols, 0.0);
  for (std::size_t j = base_cols; j < cols; ++j) phase_one_cost[j] = 1.0;
  const LpStatus s1 = rs.optimize(phase_one_cost, allowed, sol.iterations);
  if (s1 == LpStatus::IterationLimit) {
    sol.status = s1;
    return sol;
  }
  double infeas = 0.0;
  for (std::size_t i = 0; i < rs.basis().size(); ++i) {
    if (rs.basis()[i] >= base_cols) infeas += rs.xb()(static_cast<Index>(i));
  }
  sol.phase_one_objective = infeas;
  if (infeas > kPhaseOneTol) {
    sol.status = LpStatus::Infeasible;
    return sol;
  }

  // Pivot the remaining zero-valued artificials out of the basis; a row where
  // that is impossible is a combination of the others and is dropped.
  for (std::size_t i = 0; i < rs.basis().size();) {
    if (rs.basis()[i] < base_cols) {
      ++i;
      continue;
    }
    rs.factor(phase_one_cost);
    const Eigen::VectorXd w = rs.inverse_row(i);
    std::size_t col = base_cols;
    double best = 1e-9;
    for (std::size_t j = 0; j < base_cols; ++j) {
      if (rs.basic(j)) continue;
      const double v = std::fabs(w.dot(rs.column(j)));
      if (v > best) {
        best = v;
        col = j;
      }
    }
    if (col < base_cols) {
      rs.replace(i, col);
      ++i;
    } else {
      rs.drop(i, art_row[rs.basis()[i]]);
      ++sol.dropped_rows;
    }
  }
  for (std::size_t j = base_cols; j < cols; ++j) allowed[j] = 0;

  std::vector<double> cost(cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = lp.objective[j];
  LpStatus s2 = rs.optimize(cost, allowed, sol.iterations);
  // The cleanup can leave reduced costs slightly negative; a few primal
  // passes after it settle both sides.
  for (int pass = 0; pass < 3 && s2 == LpStatus::Optimal; ++pass) {
    if (!rs.restore_primal(cost, allowed, sol.iterations)) break;
    s2 = rs.optimize(cost, allowed, sol.iterations);
  }
  if (s2 != LpStatus::Optimal) {
    sol.status = s2;
    return sol;
  }

  // Certificate from the original data at the final basis.
  const auto& live_rows = rs.rows();
  const auto k = static_cast<Index>(live_rows.size());
  Eigen::MatrixXd bm(k, k);
  Eigen::VectorXd rb(k);
  Eigen::VectorXd cb(k);
  for (Index c = 0; c < k; ++c) {
    const std::size_t var = rs.basis()[static_cast<std::size_t>(c)];
    cb(c) = cost[var];
    for (Index r = 0; r < k; ++r) {
      bm(r, c) = a(static_cast<Index>(live_rows[static_cast<std::size_t>(r)]), static_cast<Index>(var));
    }
  }
  for (Index r = 0; r < k; ++r) rb(r) = b(static_cast<Index>(live_rows[static_cast<std::size_t>(r)]));
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(bm);
  const Eigen::VectorXd xb = lu.solve(rb);
  const Eigen::VectorXd y = lu.transpose().solve(cb);

  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Index>(base_cols));
  for (Index c = 0; c < k; ++c) full(static_cast<Index>(rs.basis()[static_cast<std::size_t>(c)])) = xb(c);

  double min_rc = INFINITY;
  for (std::size_t j = 0; j < base_cols; ++j) {
    if (rs.basic(j)) continue;
    double rc = cost[j];
    for (Index r = 0; r < k; ++r) {
      rc -= y(r) * a(static_cast<Index>(live_rows[static_cast<std::size_t>(r)]), static_cast<Index>(j));
    }
    min_rc = std::min(min_rc, rc);
  }
  if (!std::isfinite(min_rc)) min_rc = 0.0;

  const Eigen::VectorXd resid =
      a.leftCols(static_cast<Index>(base_cols)) * full - b;
  sol.primal_residual = resid.size() ? resid.cwiseAbs().maxCoeff() : 0.0;
  sol.min_reduced_cost = min_rc;
  sol.x.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) sol.x[j] = full(static_cast<Index>(j));
  double obj = 0.0;
  for (std::size_t j = 0; j < n; ++j) obj += lp.objective[j] * sol.x[j];
  sol.objective = obj;
  const double min_x = full.size() ? full.minCoeff() : 0.0;
  sol.certified = min_rc >= -kCertifyTol && min_x >= -kCertifyTol &&
                  sol.primal_residual <= kCertifyTol;
  sol.status = LpStatus::Optimal;
  return sol;
}

double max_violation(const LpInstance& lp, const std::vector<double>& x) {
  if (x.size() != lp.num_vars) throw InvalidInput("max_violation: wrong number of variables");
  double worst = 0.0;
  for (std::size_t r = 0; r < lp.b_eq.size(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < lp.num_vars; ++c) s += lp.a_eq(r, c) * x[c];
    worst = std::max(worst, std::abs(s - lp.b_eq[r]));
  }
  for (std::size_t r = 0; r < lp.b_ub.size(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < lp.num_vars; ++c) s += lp.a_ub(r, c) * x[c];
    worst = std::max(worst, s - lp.b_ub[r]);
  }
  for (std::size_t c = 0; c < lp.num_vars; ++c) {
    const double lo = c < lp.lower.size() ? lp.lower[c] : 0.0;
    const double hi = c < lp.upper.size() ? lp.upper[c] : INFINITY;
    worst = std::max(worst, lo - x[c]);
    worst = std::max(worst, x[c] - hi);
  }
  return worst;
}

}  // namespace airfed::postcode
