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

#include "airfed/codec.hpp"

#include <cmath>
#include <string>

#include "airfed/error.hpp"

namespace airfed::codec {

ScaleCodec make_codec(double omega, double delta, int beta_max) {
  if (!std::isfinite(omega) || !(omega > 0.0)) throw InvalidInput("codec: omega must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("codec: delta must lie in (0, 1)");
  if (beta_max < 1 || beta_max > 1000) throw InvalidInput("codec: beta_max must lie in [1, 1000]");
  return ScaleCodec{omega, delta, beta_max};
}

int beta_of(double x, const ScaleCodec& codec) {
  if (!std::isfinite(x)) throw InvalidInput("beta_of: non-finite input");
  const double ax = std::fabs(x);
  if (ax <= codec.omega) return 0;
  int k = static_cast<int>(std::ceil(std::log2(ax / codec.omega)));
  if (k < 1) k = 1;
  // log2 may land one off either way; the binary grid decides.
  while (k > 1 && ax <= std::ldexp(codec.omega, k - 1)) --k;
  while (ax > std::ldexp(codec.omega, k)) ++k;
  if (k > codec.beta_max) {
    throw ExponentOverflow("beta_of: exponent " + std::to_string(k) + " exceeds beta_max " +
                           std::to_string(codec.beta_max));
  }
  return k;
}

double psi_of(double x, const ScaleCodec& codec) {
  const int b = beta_of(x, codec);
  const double cap = 1.0 - codec.delta;
  const double v = cap * (x / std::ldexp(codec.omega, b));
  return std::fmin(cap, std::fmax(-cap, v));
}

double assemble(double psi, int beta, const ScaleCodec& codec) {
  return std::ldexp(codec.omega, beta) * (psi / (1.0 - codec.delta));
}

int bits_per_exponent(const ScaleCodec& codec) {
  int bits = 0;
  while ((1LL << bits) < static_cast<long long>(codec.beta_max) + 1) ++bits;
  return bits;
}

EncodedVector encode(std::span<const double> u, const ScaleCodec& codec) {
  EncodedVector e;
  e.psi.resize(u.size());
  e.beta.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    e.beta[i] = beta_of(u[i], codec);
    e.psi[i] = psi_of(u[i], codec);
  }
  return e;
}

std::vector<int> dac_vector(std::span<const double> x, const channel::QuantizationGrid& grid,
                            const RngStream& link) {
  std::vector<int> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    RngStream s = stage_stream(link, i, Stage::Dac);
    out[i] = channel::dac_randomize(x[i], grid, s);
  }
  return out;
}

std::vector<int> receive_levels(std::span<const int> sent, const channel::QuantizationGrid& grid,
                                const channel::AwgnChannel& ch,
                                const postcode::PostcodeMatrix* hm, const RngStream& link) {
  std::vector<int> out(sent.size());
  for (std::size_t i = 0; i < sent.size(); ++i) {
    RngStream a = stage_stream(link, i, Stage::Awgn);
    const double y = channel::awgn_transmit(grid.level(sent[i]), ch, a);
    int level = channel::adc_quantize(y, grid);
    if (hm) {
      RngStream p = stage_stream(link, i, Stage::Postcode);
      level = hm->sample(level, p);
    }
    out[i] = level;
  }
  return out;
}

std::vector<double> assemble_vector(std::span<const int> levels, std::span<const int> beta,
                                    const channel::QuantizationGrid& grid,
                                    const ScaleCodec& codec) {
  std::vector<double> out(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    out[i] = assemble(grid.level(levels[i]), beta[i], codec);
  }
  return out;
}

PipelineOutput transmit_vector(std::span<const double> u, const ScaleCodec& codec,
                               const channel::QuantizationGrid& grid,
                               const channel::AwgnChannel& ch,
                               const postcode::PostcodeMatrix& hm, const RngStream& rng) {
  const EncodedVector e = encode(u, codec);
  const std::vector<int> sent = dac_vector(e.psi, grid, rng);
  const std::vector<int> got = receive_levels(sent, grid, ch, &hm, rng);
  PipelineOutput out;
  out.u_hat = assemble_vector(got, e.beta, grid, codec);
  out.physical_symbols = u.size();
  out.coded_bits = u.size() * static_cast<std::uint64_t>(bits_per_exponent(codec));
  return out;
}

}  // namespace airfed::codec
