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
#include <cstdint>
#include <span>
#include <vector>

#include "airfed/channel.hpp"
#include "airfed/codec.hpp"
#include "airfed/postcode.hpp"
#include "airfed/rng.hpp"

/// Monte Carlo and sweep diagnostics for the transmission stack.
namespace airfed::harness {

inline constexpr double kMonteCarloZ = 5.0;

struct PipelineDiagnostics {
  std::size_t trials = 0;
  std::vector<double> u;
  std::vector<int> beta;
  std::vector<double> mean;  // per-coordinate sample mean of u_hat
  std::vector<double> se;
  std::vector<double> z;     // (mean - u) / se; 0 when both sides agree exactly
  double max_abs_z = 0.0;
  double mse = 0.0;          // sample mean of |u_hat - u|^2
  double mse_se = 0.0;
  double bound = 0.0;        // (4 v* + Delta^2)(4 |u|^2 + omega^2 d)
  bool unbiased_ok = true;   // max |z| <= kMonteCarloZ
  bool variance_ok = true;   // mse <= bound + kMonteCarloZ mse_se
};

/// Trial t transmits u over the link stream rng.child(t).
PipelineDiagnostics pipeline_diagnostics(std::span<const double> u, const codec::ScaleCodec& codec,
                                         const channel::QuantizationGrid& grid,
                                         const channel::AwgnChannel& ch,
                                         const postcode::PostcodeMatrix& hm, std::size_t trials,
                                         const RngStream& rng);

struct LevelMonteCarlo {
  int level = 0;
  bool interior = false;
  double mean = 0.0;
  double mean_se = 0.0;
  double second_moment = 0.0;  // about z_j
  double second_moment_se = 0.0;
  double z_mean = 0.0;         // against the matrix-algebra mean
  double z_second_moment = 0.0;
};

struct PostcodeMonteCarlo {
  std::size_t trials = 0;
  std::vector<LevelMonteCarlo> levels;
  double max_abs_z = 0.0;
  bool ok = true;
};

/// Sends each level through AWGN, ADC and H `trials` times (level j on
/// rng.child(j)) and compares the empirical moments with `exact`. Standard
/// errors come from the exact output law of each level.
PostcodeMonteCarlo postcode_monte_carlo(const postcode::PostcodeMatrix& hm,
                                        const postcode::CertificationReport& exact,
                                        const channel::QuantizationGrid& grid,
                                        const channel::AwgnChannel& ch, std::size_t trials,
                                        const RngStream& rng);

struct CodecIdentityReport {
  std::size_t trials = 0;
  std::uint64_t max_ulps = 0;  // |assemble(psi_of(x), beta_of(x)) - x| in ulps
  double worst_x = 0.0;
  double max_abs_psi = 0.0;
  bool psi_ok = true;          // |psi| <= 1 - Delta
  std::size_t bracket_failures = 0;  // 2^beta omega > max(2|x|, omega)
};

/// |x| log-uniform over [omega 2^-30, omega 2^beta_max], random sign.
CodecIdentityReport codec_identities(const codec::ScaleCodec& codec, std::size_t trials,
                                     const RngStream& rng);

/// Distance in units in the last place between two finite doubles.
std::uint64_t ulp_distance(double a, double b);

}  // namespace airfed::harness
