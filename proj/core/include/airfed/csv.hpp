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
#include <iosfwd>
#include <string>
#include <vector>

#include "airfed/fedsim.hpp"
#include "airfed/ledger.hpp"

namespace airfed::harness {

/// %.17g, with "nan", "inf" and "-inf" for non-finite values; parse_double
/// inverts it exactly.
std::string format_double(double v);
double parse_double(const std::string& s);

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

struct MetricsRow {
  std::size_t round = 0;
  std::string scheme;
  std::uint64_t seed = 0;
  double loss = 0.0;
  double sq_dist = 0.0;
  double grad_norm_sq = 0.0;
  double disagreement = 0.0;
  double phys_symbols_cum = 0.0;
  double coded_symbols_cum = 0.0;
};

struct LedgerRow {
  std::size_t round = 0;
  std::string direction;
  std::size_t worker = 0;
  double phys_symbols = 0.0;
  double coded_symbols = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "round,scheme,seed,loss,sq_dist,grad_norm_sq,disagreement,phys_symbols_cum,coded_symbols_cum";
inline constexpr const char* kLedgerHeader = "round,direction,worker,phys_symbols,coded_symbols";

std::vector<MetricsRow> metrics_rows(const fedsim::RunResult& run);
std::vector<LedgerRow> ledger_rows(const CommLedger& ledger, const ChannelBudget& budget);

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows,
                       bool header = true);
void write_ledger_csv(std::ostream& os, const std::vector<LedgerRow>& rows);

/// Throw InvalidInput on a malformed header or row.
std::vector<MetricsRow> read_metrics_csv(std::istream& is);
std::vector<LedgerRow> read_ledger_csv(std::istream& is);

/// Field-wise equality treating NaN as equal to NaN.
bool same_rows(const std::vector<MetricsRow>& a, const std::vector<MetricsRow>& b);
bool same_rows(const std::vector<LedgerRow>& a, const std::vector<LedgerRow>& b);

/// Splits one CSV line on commas (no quoting; none of our fields need it).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace airfed::harness
