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

#include <optional>
#include <string>
#include <vector>

#include "airfed/channel.hpp"
#include "airfed/matrix.hpp"
#include "airfed/rng.hpp"
#include "airfed/simplex.hpp"

namespace airfed::postcode {

/// Row-stochastic q x q remapping of received levels, with the worst-case
/// interior variance it is certified for. Immutable once built.
class PostcodeMatrix {
 public:
  PostcodeMatrix() = default;

  /// Clamps entries in [-1e-12, 0) to zero and renormalizes every row. Throws
  /// InvalidInput for non-square input, entries below -1e-12 or empty rows.
  PostcodeMatrix(Matrix h, double v_star);

  /// Takes `h` verbatim, without clamping or renormalizing. Sampling treats
  /// any mass missing from a row as belonging to its last positive entry.
  /// Intended for negative controls.
  static PostcodeMatrix unchecked(Matrix h, double v_star);

  int q() const noexcept { return static_cast<int>(h_.rows()); }
  const Matrix& h() const noexcept { return h_; }
  double v_star() const noexcept { return v_star_; }

  /// Inverse-CDF draw from row `level_index`; consumes exactly one draw.
  int sample(int level_index, RngStream& rng) const;

 private:
  void build_tables();

  Matrix h_;
  double v_star_ = 0.0;
  Matrix cdf_;
};

/// Variables are H(i, k) at lp.h_index(i, k) followed by v.
LpInstance build_lp(const channel::TransitionMatrix& p, const channel::QuantizationGrid& grid);

/// Returns nullopt when the instance is infeasible. Throws Error when the
/// solver stops without a certified optimum.
std::optional<PostcodeMatrix> solve_lp(const LpInstance& lp, LpSolution* diagnostics = nullptr);

/// H(zeta*) from the banded construction, with its exact worst-case interior
/// variance as v_star.
struct Construction {
  PostcodeMatrix hm;
  std::vector<double> zeta;
  double zeta_inf_norm = 0.0;
  double pstar_inverse_norm = 0.0;
};

/// Returns nullopt when the interior block of P is singular or |zeta*| > 1.
std::optional<Construction> feasible_construction(const channel::TransitionMatrix& p,
                                                  const channel::QuantizationGrid& grid);

/// Induced infinity norm of the inverse of P restricted to interior levels;
/// +inf when that block is singular.
double pstar_inverse_norm(const channel::TransitionMatrix& p);

/// Banded matrix H(zeta) for interior offsets zeta (size q - 2).
Matrix banded_h(const std::vector<double>& zeta);

int apply_postcode(const PostcodeMatrix& hm, int level_index, RngStream& rng);

struct LevelCertificate {
  int level = 0;
  bool interior = false;
  double mean = 0.0;
  // Second moment about the input level, sum_i (PH)(j, i) (z_i - z_j)^2; on
  // interior levels of a certified H this is the variance.
  double variance = 0.0;
  double bias = 0.0;
  bool unbiased_ok = true;
  bool variance_ok = true;
};

struct CertificationReport {
  std::vector<LevelCertificate> levels;
  double max_interior_abs_bias = 0.0;
  double max_interior_variance = 0.0;
  bool ok = true;
};

inline constexpr double kUnbiasTol = 1e-8;
inline constexpr double kVarianceTol = 1e-8;

CertificationReport certify(const PostcodeMatrix& hm, const channel::TransitionMatrix& p,
                            const channel::QuantizationGrid& grid);

enum class PostcodePath { Lp, Construction, Identity };

std::string to_string(PostcodePath path);

struct Postcode {
  PostcodeMatrix hm;
  PostcodePath path = PostcodePath::Lp;
  // Transition matrix H was built against (identity on the noiseless path).
  channel::TransitionMatrix p;
};

/// Post-coding for a grid and noise level: the LP optimum, falling back to
/// the construction when the LP is infeasible. A noiseless channel, or one
/// whose P is exactly the identity, gets H = I and v* = 0. Returns nullopt
/// when neither route yields a feasible H.
std::optional<Postcode> make_postcode(const channel::QuantizationGrid& grid, double sigma_c);

}  // namespace airfed::postcode
