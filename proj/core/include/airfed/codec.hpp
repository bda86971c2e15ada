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

#include <cstdint>
#include <span>
#include <vector>

#include "airfed/channel.hpp"
#include "airfed/postcode.hpp"
#include "airfed/rng.hpp"

namespace airfed::codec {

struct ScaleCodec {
  double omega = 0.0;
  double delta = 0.0;
  int beta_max = 63;
};

/// Throws InvalidInput unless omega > 0, 0 < delta < 1 and 1 <= beta_max <= 1000.
ScaleCodec make_codec(double omega, double delta, int beta_max = 63);

/// Smallest k >= 0 with |x| <= 2^k omega, decided by exact comparison against
/// the binary grid. Throws ExponentOverflow above beta_max, InvalidInput for
/// non-finite x.
int beta_of(double x, const ScaleCodec& codec);

/// (1 - delta) x / (2^beta omega); the result never exceeds 1 - delta in
/// magnitude.
double psi_of(double x, const ScaleCodec& codec);

/// 2^beta omega psi / (1 - delta).
double assemble(double psi, int beta, const ScaleCodec& codec);

/// Width of the fixed-size exponent field on the coded channel.
int bits_per_exponent(const ScaleCodec& codec);

struct EncodedVector {
  std::vector<double> psi;
  std::vector<int> beta;
};

EncodedVector encode(std::span<const double> u, const ScaleCodec& codec);

/// RNG sub-streams of one coordinate; each stage consumes one draw.
enum class Stage : std::uint64_t { Dac = 1, Awgn = 2, Postcode = 3 };

inline RngStream stage_stream(const RngStream& link, std::size_t coordinate, Stage stage) {
  return link.child({static_cast<std::uint64_t>(coordinate), static_cast<std::uint64_t>(stage)});
}

/// Randomized DAC of every coordinate; coordinate i draws from
/// stage_stream(link, i, Dac).
std::vector<int> dac_vector(std::span<const double> x, const channel::QuantizationGrid& grid,
                            const RngStream& link);

/// AWGN, ADC and (when `hm` is non-null) post-coding of every coordinate,
/// drawing from the Awgn and Postcode stages of `link`.
std::vector<int> receive_levels(std::span<const int> sent, const channel::QuantizationGrid& grid,
                                const channel::AwgnChannel& ch,
                                const postcode::PostcodeMatrix* hm, const RngStream& link);

std::vector<double> assemble_vector(std::span<const int> levels, std::span<const int> beta,
                                    const channel::QuantizationGrid& grid,
                                    const ScaleCodec& codec);

struct PipelineOutput {
  std::vector<double> u_hat;
  std::uint64_t physical_symbols = 0;
  std::uint64_t coded_bits = 0;
};

/// encode -> DAC -> AWGN -> ADC -> post-code -> assemble with the sender's
/// exponents. `rng` is the link stream; it is not advanced.
PipelineOutput transmit_vector(std::span<const double> u, const ScaleCodec& codec,
                               const channel::QuantizationGrid& grid,
                               const channel::AwgnChannel& ch,
                               const postcode::PostcodeMatrix& hm, const RngStream& rng);

}  // namespace airfed::codec
