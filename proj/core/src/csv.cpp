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

#include "airfed/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "airfed/error.hpp"

namespace airfed::harness {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  // strtod reports ERANGE for subnormals too; only overflow is an error here.
  if (s.empty() || *end != '\0' || (errno == ERANGE && std::isinf(v))) {
    throw InvalidInput("csv: cannot parse number '" + s + "'");
  }
  return v;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
}

std::vector<MetricsRow> metrics_rows(const fedsim::RunResult& run) {
  std::vector<MetricsRow> rows;
  rows.reserve(run.metrics.size());
  const std::string name = fedsim::to_string(run.scheme);
  for (const auto& m : run.metrics) {
    rows.push_back({m.round, name, run.seed, m.loss, m.sq_dist, m.grad_norm_sq, m.disagreement,
                    m.phys_symbols_cum, m.coded_symbols_cum});
  }
  return rows;
}

std::vector<LedgerRow> ledger_rows(const CommLedger& ledger, const ChannelBudget& budget) {
  std::vector<LedgerRow> rows;
  rows.reserve(ledger.records().size());
  for (const auto& r : ledger.records()) {
    rows.push_back({r.round, to_string(r.direction), r.worker,
                    physical_symbols(r.phys_scalars, budget), coded_symbols(r.coded_bits, budget)});
  }
  return rows;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows, bool header) {
  if (header) os << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    os << r.round << ',' << r.scheme << ',' << r.seed << ',' << format_double(r.loss) << ','
       << format_double(r.sq_dist) << ',' << format_double(r.grad_norm_sq) << ','
       << format_double(r.disagreement) << ',' << format_double(r.phys_symbols_cum) << ','
       << format_double(r.coded_symbols_cum) << '\n';
  }
}

void write_ledger_csv(std::ostream& os, const std::vector<LedgerRow>& rows) {
  os << kLedgerHeader << '\n';
  for (const auto& r : rows) {
    os << r.round << ',' << r.direction << ',' << r.worker << ',' << format_double(r.phys_symbols)
       << ',' << format_double(r.coded_symbols) << '\n';
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

namespace {

std::uint64_t parse_uint(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw InvalidInput("csv: cannot parse integer '" + s + "'");
  }
  return std::strtoull(s.c_str(), nullptr, 10);
}

void expect_header(std::istream& is, const char* header) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw InvalidInput("csv: unexpected header '" + line + "'");
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

std::vector<MetricsRow> read_metrics_csv(std::istream& is) {
  expect_header(is, kMetricsHeader);
  std::vector<MetricsRow> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 9) throw InvalidInput("csv: metrics row needs 9 fields");
    MetricsRow r;
    r.round = static_cast<std::size_t>(parse_uint(f[0]));
    r.scheme = f[1];
    r.seed = parse_uint(f[2]);
    r.loss = parse_double(f[3]);
    r.sq_dist = parse_double(f[4]);
    r.grad_norm_sq = parse_double(f[5]);
    r.disagreement = parse_double(f[6]);
    r.phys_symbols_cum = parse_double(f[7]);
    r.coded_symbols_cum = parse_double(f[8]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<LedgerRow> read_ledger_csv(std::istream& is) {
  expect_header(is, kLedgerHeader);
  std::vector<LedgerRow> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw InvalidInput("csv: ledger row needs 5 fields");
    LedgerRow r;
    r.round = static_cast<std::size_t>(parse_uint(f[0]));
    r.direction = f[1];
    r.worker = static_cast<std::size_t>(parse_uint(f[2]));
    r.phys_symbols = parse_double(f[3]);
    r.coded_symbols = parse_double(f[4]);
    rows.push_back(std::move(r));
  }
  return rows;
}

bool same_rows(const std::vector<MetricsRow>& a, const std::vector<MetricsRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto &x = a[i], &y = b[i];
    if (x.round != y.round || x.scheme != y.scheme || x.seed != y.seed || !same(x.loss, y.loss) ||
        !same(x.sq_dist, y.sq_dist) || !same(x.grad_norm_sq, y.grad_norm_sq) ||
        !same(x.disagreement, y.disagreement) || !same(x.phys_symbols_cum, y.phys_symbols_cum) ||
        !same(x.coded_symbols_cum, y.coded_symbols_cum)) {
      return false;
    }
  }
  return true;
}

bool same_rows(const std::vector<LedgerRow>& a, const std::vector<LedgerRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto &x = a[i], &y = b[i];
    if (x.round != y.round || x.direction != y.direction || x.worker != y.worker ||
        !same(x.phys_symbols, y.phys_symbols) || !same(x.coded_symbols, y.coded_symbols)) {
      return false;
    }
  }
  return true;
}

}  // namespace airfed::harness
