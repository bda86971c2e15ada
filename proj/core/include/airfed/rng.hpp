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
#include <initializer_list>
#include <limits>

namespace airfed {

/// Stafford's "mix13" finalizer, the output function of SplitMix64.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream.
///
/// A stream is a 64-bit key plus a draw counter; draw k is mix64(key + k*gamma),
/// i.e. SplitMix64 started at `key`. Child streams are derived by hashing tags
/// into the key, so the values a consumer sees depend only on the path of tags
/// from the root seed and never on the order in which other streams are used.
/// All variate generation is done here rather than through <random>
/// distributions, whose outputs are implementation-defined.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed) noexcept : key_(mix64(seed ^ kRootSalt)) {}

  RngStream child(std::uint64_t tag) const noexcept {
    return RngStream(Key{mix64(key_ ^ mix64(tag + kChildSalt))});
  }

  RngStream child(std::initializer_list<std::uint64_t> tags) const noexcept {
    RngStream s = *this;
    for (const auto t : tags) s = s.child(t);
    return s;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t draws() const noexcept { return counter_; }

  std::uint64_t operator()() noexcept { return mix64(key_ + (++counter_) * kGamma); }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1).
  double open_uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal variate from a single draw (inverse-CDF method).
  double normal() noexcept;

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  struct Key {
    std::uint64_t value;
  };
  explicit RngStream(Key k) noexcept : key_(k.value) {}

  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kRootSalt = 0x5851f42d4c957f2dULL;
  static constexpr std::uint64_t kChildSalt = 0x14057b7ef767814fULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Inverse of the standard normal CDF on (0, 1); Wichura's AS 241 (PPND16),
/// relative accuracy about 1e-16.
double inverse_normal_cdf(double p) noexcept;

}  // namespace airfed
