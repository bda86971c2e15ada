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
#include <string>
#include <vector>

#include "airfed/schedule.hpp"
#include "airfed/scheme.hpp"

namespace airfed::harness {

/// Coded-channel parameters: b bits per real, 2^ell-ary PAM, FEC overhead
/// alpha, and whether two PAM symbols share one complex symbol.
struct ChannelBudget {
  int b = 32;
  int ell = 1;
  double alpha = 0.0;
  bool iq_halving = false;
};

/// Throws ConfigError unless b >= 1, ell >= 1, alpha >= 0.
ChannelBudget make_budget(int b, int ell, double alpha, bool iq_halving);

/// (b / ell)(1 + alpha), halved under I/Q.
double coded_symbols_per_scalar(const ChannelBudget& budget);

/// Channel symbols for a number of bits on the coded path.
double coded_symbols(std::uint64_t bits, const ChannelBudget& budget);

/// Channel symbols for a number of analog scalars; the I/Q halving applies to
/// both paths.
double physical_symbols(std::uint64_t scalars, const ChannelBudget& budget);

enum class Direction { Up, Down };

std::string to_string(Direction d);

/// One link use. Counts are kept as integers (analog scalars and coded bits)
/// so totals are exact; symbols are derived through a ChannelBudget.
struct LedgerRecord {
  std::size_t round = 0;
  Direction direction = Direction::Up;
  std::size_t worker = 0;
  std::uint64_t phys_scalars = 0;
  std::uint64_t coded_bits = 0;
};

class CommLedger {
 public:
  explicit CommLedger(bool keep_records = true) : keep_(keep_records) {}

  void add(const LedgerRecord& r);

  const std::vector<LedgerRecord>& records() const noexcept { return records_; }
  std::uint64_t phys_scalars() const noexcept { return phys_; }
  std::uint64_t coded_bits() const noexcept { return bits_; }

 private:
  bool keep_;
  std::vector<LedgerRecord> records_;
  std::uint64_t phys_ = 0;
  std::uint64_t bits_ = 0;
};

struct LedgerTotals {
  std::uint64_t phys_scalars = 0;
  std::uint64_t coded_bits = 0;
  double phys_symbols = 0.0;
  double coded_symbols = 0.0;
  double total_symbols = 0.0;

  bool operator==(const LedgerTotals&) const = default;
};

LedgerTotals totals(std::uint64_t phys_scalars, std::uint64_t coded_bits,
                    const ChannelBudget& budget);
LedgerTotals totals(const CommLedger& ledger, const ChannelBudget& budget);

/// Closed-form totals for n rounds of a scheme with m workers in dimension d.
///   Coded:    2nmd reals on the coded path
///   Noisy:    2nmd analog scalars
///   Postcode: 2nmd analog scalars + 2nmd exponents
///   Sync:     Noisy + m d reals per sync round
///   Ours:     Postcode + m d reals per sync round
LedgerTotals scheme_ledger(fedsim::Scheme scheme, std::size_t d, std::size_t m, std::size_t n,
                           const fedsim::SyncSchedule& sync, const ChannelBudget& budget,
                           int bits_per_exponent);

}  // namespace airfed::harness
