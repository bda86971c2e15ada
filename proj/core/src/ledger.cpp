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

#include "airfed/ledger.hpp"

#include <cctype>

#include "airfed/error.hpp"

namespace airfed::fedsim {

SchemeTraits traits(Scheme s) {
  switch (s) {
    case Scheme::Coded:
      return {false, false, false, false};
    case Scheme::Noisy:
      return {true, false, false, false};
    case Scheme::Postcode:
      return {true, true, true, false};
    case Scheme::Sync:
      return {true, false, false, true};
    case Scheme::Ours:
      return {true, true, true, true};
  }
  return {};
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::Coded:
      return "Coded";
    case Scheme::Noisy:
      return "Noisy";
    case Scheme::Postcode:
      return "Postcode";
    case Scheme::Sync:
      return "Sync";
    case Scheme::Ours:
      return "Ours";
  }
  return "unknown";
}

std::optional<Scheme> parse_scheme(const std::string& name) {
  for (const Scheme s : kAllSchemes) {
    std::string canon = to_string(s);
    if (name.size() != canon.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < name.size(); ++i) {
      const auto a = static_cast<unsigned char>(name[i]);
      const auto b = static_cast<unsigned char>(canon[i]);
      if (std::tolower(a) != std::tolower(b)) same = false;
    }
    if (same) return s;
  }
  return std::nullopt;
}

}  // namespace airfed::fedsim

namespace airfed::harness {

ChannelBudget make_budget(int b, int ell, double alpha, bool iq_halving) {
  if (b < 1) throw ConfigError("budget.b", "must be >= 1");
  if (ell < 1) throw ConfigError("budget.ell", "must be >= 1");
  if (!(alpha >= 0.0)) throw ConfigError("budget.alpha", "must be >= 0");
  return ChannelBudget{b, ell, alpha, iq_halving};
}

double coded_symbols_per_scalar(const ChannelBudget& budget) {
  return coded_symbols(static_cast<std::uint64_t>(budget.b), budget);
}

double coded_symbols(std::uint64_t bits, const ChannelBudget& budget) {
  const double v = static_cast<double>(bits) / budget.ell * (1.0 + budget.alpha);
  return budget.iq_halving ? 0.5 * v : v;
}

double physical_symbols(std::uint64_t scalars, const ChannelBudget& budget) {
  const auto v = static_cast<double>(scalars);
  return budget.iq_halving ? 0.5 * v : v;
}

std::string to_string(Direction d) { return d == Direction::Up ? "up" : "down"; }

void CommLedger::add(const LedgerRecord& r) {
  phys_ += r.phys_scalars;
  bits_ += r.coded_bits;
  if (keep_) records_.push_back(r);
}

LedgerTotals totals(std::uint64_t phys_scalars, std::uint64_t coded_bits,
                    const ChannelBudget& budget) {
  LedgerTotals t;
  t.phys_scalars = phys_scalars;
  t.coded_bits = coded_bits;
  t.phys_symbols = physical_symbols(phys_scalars, budget);
  t.coded_symbols = coded_symbols(coded_bits, budget);
  t.total_symbols = t.phys_symbols + t.coded_symbols;
  return t;
}

LedgerTotals totals(const CommLedger& ledger, const ChannelBudget& budget) {
  return totals(ledger.phys_scalars(), ledger.coded_bits(), budget);
}

LedgerTotals scheme_ledger(fedsim::Scheme scheme, std::size_t d, std::size_t m, std::size_t n,
                           const fedsim::SyncSchedule& sync, const ChannelBudget& budget,
                           int bits_per_exponent) {
  const fedsim::SchemeTraits t = fedsim::traits(scheme);
  const std::uint64_t per_direction = static_cast<std::uint64_t>(n) * m * d;
  const auto b = static_cast<std::uint64_t>(budget.b);
  std::uint64_t phys = 0;
  std::uint64_t bits = 0;
  if (t.physical) {
    phys = 2 * per_direction;
    if (t.codec) bits += 2 * per_direction * static_cast<std::uint64_t>(bits_per_exponent);
  } else {
    bits += 2 * per_direction * b;
  }
  if (t.sync) bits += static_cast<std::uint64_t>(sync.times(n).size()) * m * d * b;
  return totals(phys, bits, budget);
}

}  // namespace airfed::harness
