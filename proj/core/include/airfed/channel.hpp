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
#include <vector>

#include "airfed/matrix.hpp"
#include "airfed/rng.hpp"

namespace airfed::channel {

/// q equispaced levels on [-1, 1]. Levels are indexed 0..q-1.
struct QuantizationGrid {
  int q = 0;
  double delta = 0.0;
  std::vector<double> levels;

  double level(int i) const { return levels[static_cast<std::size_t>(i)]; }
};

/// Additive white Gaussian noise. sigma_c == 0 denotes a noiseless link.
struct AwgnChannel {
  double sigma_c = 0.0;
};

/// P(i, j) = Pr(ADC(level_i + noise) = level_j).
struct TransitionMatrix {
  Matrix p;
};

/// Throws InvalidGrid when q < 4.
QuantizationGrid make_grid(int q);

/// Throws InvalidInput when sigma_c is negative or not finite.
AwgnChannel make_channel(double sigma_c);

/// Nearest level; an exact midpoint resolves to the lower index.
int adc_quantize(double x, const QuantizationGrid& grid);

/// Randomized rounding onto the grid, saturating outside [-1, 1]. Always
/// consumes exactly one draw from `rng`.
int dac_randomize(double x, const QuantizationGrid& grid, RngStream& rng);

/// level + N(0, sigma_c^2); consumes exactly one draw.
double awgn_transmit(double level, const AwgnChannel& ch, RngStream& rng);

/// Exact transition matrix of ADC after AWGN. Throws InvalidInput unless
/// sigma_c > 0.
TransitionMatrix transition_matrix(const QuantizationGrid& grid, double sigma_c);

/// Standard normal CDF and its complement, accurate to about 1e-16 absolute.
double normal_cdf(double x);
double normal_sf(double x);

/// Pr(a < Z <= b) for a standard normal Z, evaluated on whichever tail keeps
/// the difference well conditioned.
double normal_interval(double a, double b);

}  // namespace airfed::channel
