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
#include <limits>
#include <vector>

#include "airfed/matrix.hpp"

namespace airfed::postcode {

/// min c^T x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  lower <= x <= upper.
///
/// The solver handles the bound pattern lower = 0, upper = +inf, which is all
/// the post-coding family needs; other bounds are rejected. Missing bound
/// entries take those defaults.
struct LpInstance {
  std::size_t num_vars = 0;
  std::vector<double> objective;
  Matrix a_eq;
  std::vector<double> b_eq;
  Matrix a_ub;
  std::vector<double> b_ub;
  std::vector<double> lower;
  std::vector<double> upper;

  /// Grid size when the instance came from build_lp, else 0.
  int q = 0;

  std::size_t h_index(int i, int k) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(q) +
           static_cast<std::size_t>(k);
  }
  std::size_t v_index() const { return static_cast<std::size_t>(q) * static_cast<std::size_t>(q); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double phase_one_objective = std::numeric_limits<double>::quiet_NaN();
  // Smallest reduced cost over nonbasic columns, recomputed from the original
  // data at the final basis.
  double min_reduced_cost = std::numeric_limits<double>::quiet_NaN();
  double primal_residual = std::numeric_limits<double>::quiet_NaN();
  bool certified = false;
  std::size_t iterations = 0;
  std::size_t dropped_rows = 0;
};

/// Dense two-phase revised simplex. Pricing is Dantzig with a fallback to
/// Bland's rule after a run of degenerate pivots.
LpSolution solve_simplex(const LpInstance& lp);

/// Largest violation of any constraint or bound of `lp` at `x` (0 when x is
/// feasible).
double max_violation(const LpInstance& lp, const std::vector<double>& x);

}  // namespace airfed::postcode
