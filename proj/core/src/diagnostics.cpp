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

#include "airfed/diagnostics.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "airfed/error.hpp"

namespace airfed::harness {

namespace {

double z_score(double diff, double se) {
  if (se > 0.0) return diff / se;
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

PipelineDiagnostics pipeline_diagnostics(std::span<const double> u, const codec::ScaleCodec& codec,
                                         const channel::QuantizationGrid& grid,
                                         const channel::AwgnChannel& ch,
                                         const postcode::PostcodeMatrix& hm, std::size_t trials,
                                         const RngStream& rng) {
  if (trials < 2) throw InvalidInput("pipeline_diagnostics: need at least 2 trials");
  const std::size_t d = u.size();
  PipelineDiagnostics out;
  out.trials = trials;
  out.u.assign(u.begin(), u.end());
  out.beta = codec::encode(u, codec).beta;

  std::vector<double> sum(d, 0.0), sumsq(d, 0.0);
  double err_sum = 0.0, err_sumsq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto res = codec::transmit_vector(u, codec, grid, ch, hm, rng.child(t));
    double err = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      // Deviations from u keep the accumulated squares well conditioned.
      const double dev = res.u_hat[i] - u[i];
      sum[i] += dev;
      sumsq[i] += dev * dev;
      err += dev * dev;
    }
    err_sum += err;
    err_sumsq += err * err;
  }

  const double n = static_cast<double>(trials);
  double norm_sq = 0.0;
  out.mean.resize(d);
  out.se.resize(d);
  out.z.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double md = sum[i] / n;
    const double var = std::max(0.0, (sumsq[i] - n * md * md) / (n - 1.0));
    out.mean[i] = u[i] + md;
    out.se[i] = std::sqrt(var / n);
    out.z[i] = z_score(md, out.se[i]);
    out.max_abs_z = std::max(out.max_abs_z, std::abs(out.z[i]));
    norm_sq += u[i] * u[i];
  }
  out.mse = err_sum / n;
  out.mse_se = std::sqrt(std::max(0.0, (err_sumsq - n * out.mse * out.mse) / (n - 1.0)) / n);
  const double delta = grid.delta;
  out.bound = (4.0 * hm.v_star() + delta * delta) *
              (4.0 * norm_sq + codec.omega * codec.omega * static_cast<double>(d));
  out.unbiased_ok = out.max_abs_z <= kMonteCarloZ;
  out.variance_ok = out.mse <= out.bound + kMonteCarloZ * out.mse_se;
  return out;
}

PostcodeMonteCarlo postcode_monte_carlo(const postcode::PostcodeMatrix& hm,
                                        const postcode::CertificationReport& exact,
                                        const channel::QuantizationGrid& grid,
                                        const channel::AwgnChannel& ch, std::size_t trials,
                                        const RngStream& rng) {
  if (trials < 2) throw InvalidInput("postcode_monte_carlo: need at least 2 trials");
  if (exact.levels.size() != static_cast<std::size_t>(grid.q)) {
    throw InvalidInput("postcode_monte_carlo: certificate does not match the grid");
  }
  PostcodeMonteCarlo out;
  out.trials = trials;
  const double n = static_cast<double>(trials);
  const auto q = static_cast<std::size_t>(grid.q);
  const channel::TransitionMatrix p =
      ch.sigma_c > 0.0 ? channel::transition_matrix(grid, ch.sigma_c) : channel::TransitionMatrix{Matrix::identity(q)};
  for (int j = 0; j < grid.q; ++j) {
    RngStream s = rng.child(static_cast<std::uint64_t>(j));
    const double zj = grid.level(j);
    double s1 = 0, s2 = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const double y = channel::awgn_transmit(zj, ch, s);
      const int k = hm.sample(channel::adc_quantize(y, grid), s);
      const double e = grid.level(k) - zj;
      s1 += e;
      s2 += e * e;
    }
    // Reference scale from the exact output law, row j of P H.
    double e1 = 0, e2 = 0, e4 = 0;
    for (std::size_t k = 0; k < q; ++k) {
      double r = 0.0;
      for (std::size_t i = 0; i < q; ++i) r += p.p(static_cast<std::size_t>(j), i) * hm.h()(i, k);
      const double e = grid.level(static_cast<int>(k)) - zj;
      e1 += r * e;
      e2 += r * e * e;
      e4 += r * e * e * e * e;
    }
    LevelMonteCarlo lv;
    lv.level = j;
    lv.interior = j > 0 && j < grid.q - 1;
    lv.mean = zj + s1 / n;
    lv.mean_se = std::sqrt(std::max(0.0, e2 - e1 * e1) / n);
    lv.second_moment = s2 / n;
    lv.second_moment_se = std::sqrt(std::max(0.0, e4 - e2 * e2) / n);
    const auto& ex = exact.levels[static_cast<std::size_t>(j)];
    lv.z_mean = z_score(lv.mean - ex.mean, lv.mean_se);
    lv.z_second_moment = z_score(lv.second_moment - ex.variance, lv.second_moment_se);
    out.max_abs_z = std::max({out.max_abs_z, std::abs(lv.z_mean), std::abs(lv.z_second_moment)});
    out.levels.push_back(lv);
  }
  out.ok = out.max_abs_z <= kMonteCarloZ;
  return out;
}

std::uint64_t ulp_distance(double a, double b) {
  const auto ordered = [](double x) {
    const auto bits = std::bit_cast<std::int64_t>(x);
    return bits < 0 ? std::numeric_limits<std::int64_t>::min() - bits : bits;
  };
  const std::int64_t ia = ordered(a);
  const std::int64_t ib = ordered(b);
  return ia > ib ? static_cast<std::uint64_t>(ia) - static_cast<std::uint64_t>(ib)
                 : static_cast<std::uint64_t>(ib) - static_cast<std::uint64_t>(ia);
}

CodecIdentityReport codec_identities(const codec::ScaleCodec& codec, std::size_t trials,
                                     const RngStream& rng) {
  CodecIdentityReport out;
  out.trials = trials;
  RngStream s = rng;
  const double lo = -30.0;
  const double hi = static_cast<double>(codec.beta_max);
  const double cap = 1.0 - codec.delta;
  for (std::size_t t = 0; t < trials; ++t) {
    const double e = lo + (hi - lo) * s.uniform();
    const double x = (s.uniform() < 0.5 ? -1.0 : 1.0) * codec.omega * std::exp2(e);
    const int beta = codec::beta_of(x, codec);
    const double psi = codec::psi_of(x, codec);
    const double back = codec::assemble(psi, beta, codec);
    const std::uint64_t ulps = ulp_distance(back, x);
    if (ulps > out.max_ulps) {
      out.max_ulps = ulps;
      out.worst_x = x;
    }
    out.max_abs_psi = std::max(out.max_abs_psi, std::abs(psi));
    if (std::abs(psi) > cap) out.psi_ok = false;
    if (std::ldexp(codec.omega, beta) > std::max(2.0 * std::abs(x), codec.omega)) {
      ++out.bracket_failures;
    }
  }
  return out;
}

}  // namespace airfed::harness
