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

#include "airfed/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "airfed/error.hpp"

namespace airfed {

Matrix operator*(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

}  // namespace airfed

namespace airfed::channel {

QuantizationGrid make_grid(int q) {
  if (q < 4) throw InvalidGrid("grid needs at least 4 levels, got " + std::to_string(q));
  QuantizationGrid g;
  g.q = q;
  const double span = static_cast<double>(q - 1);
  g.delta = 2.0 / span;
  g.levels.resize(static_cast<std::size_t>(q));
  // Written as a ratio of integers so that level(i) == -level(q-1-i) exactly.
  for (int i = 0; i < q; ++i) g.levels[static_cast<std::size_t>(i)] = (2.0 * i - span) / span;
  return g;
}

AwgnChannel make_channel(double sigma_c) {
  if (!std::isfinite(sigma_c) || sigma_c < 0.0) {
    throw InvalidInput("sigma_c must be finite and non-negative");
  }
  return AwgnChannel{sigma_c};
}

int adc_quantize(double x, const QuantizationGrid& grid) {
  if (!std::isfinite(x)) throw InvalidInput("adc_quantize: non-finite input");
  const int top = grid.q - 1;
  if (x <= grid.levels.front()) return 0;
  if (x >= grid.levels.back()) return top;
  int i = static_cast<int>(std::floor((x + 1.0) / grid.delta));
  if (i < 0) i = 0;
  if (i > top - 1) i = top - 1;
  // The floor guess can be off by one near level boundaries; settle it against
  // the stored levels so the bracket z_i <= x < z_{i+1} is exact.
  while (i > 0 && x < grid.level(i)) --i;
  while (i < top - 1 && x >= grid.level(i + 1)) ++i;
  // The decision threshold is the rounded midpoint of the stored levels.
  const double mid = 0.5 * (grid.level(i) + grid.level(i + 1));
  return x > mid ? i + 1 : i;
}

int dac_randomize(double x, const QuantizationGrid& grid, RngStream& rng) {
  if (!std::isfinite(x)) throw InvalidInput("dac_randomize: non-finite input");
  const double u = rng.uniform();
  const int top = grid.q - 1;
  if (x < grid.levels.front()) return 0;
  if (x >= grid.levels.back()) return top;
  int i = static_cast<int>(std::floor((x + 1.0) / grid.delta));
  if (i < 0) i = 0;
  if (i > top - 1) i = top - 1;
  while (i > 0 && x < grid.level(i)) --i;
  while (i < top - 1 && x >= grid.level(i + 1)) ++i;
  const double frac = (x - grid.level(i)) / grid.delta;
  return u < frac ? i + 1 : i;
}

double awgn_transmit(double level, const AwgnChannel& ch, RngStream& rng) {
  const double eps = rng.normal();
  return level + ch.sigma_c * eps;
}

namespace {
constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;
}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double normal_interval(double a, double b) {
  if (a >= 0.0) return normal_sf(a) - normal_sf(b);
  if (b <= 0.0) return normal_cdf(b) - normal_cdf(a);
  return 1.0 - normal_cdf(a) - normal_sf(b);
}

TransitionMatrix transition_matrix(const QuantizationGrid& grid, double sigma_c) {
  if (!(sigma_c > 0.0) || !std::isfinite(sigma_c)) {
    throw InvalidInput("transition_matrix: sigma_c must be positive");
  }
  const int q = grid.q;
  const double half = grid.delta / 2.0;
  TransitionMatrix t{Matrix(static_cast<std::size_t>(q), static_cast<std::size_t>(q))};
  for (int i = 0; i < q; ++i) {
    const double zi = grid.level(i);
    for (int j = 0; j < q; ++j) {
      const double zj = grid.level(j);
      double p;
      if (j == 0) {
        p = normal_cdf((zj + half - zi) / sigma_c);
      } else if (j == q - 1) {
        p = normal_sf((zj - half - zi) / sigma_c);
      } else {
        p = normal_interval((zj - half - zi) / sigma_c, (zj + half - zi) / sigma_c);
      }
      t.p(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = p;
    }
  }
  return t;
}

}  // namespace airfed::channel
