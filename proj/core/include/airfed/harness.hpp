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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "airfed/fedsim.hpp"
#include "airfed/ledger.hpp"

namespace airfed::harness {

/// Runs fn(0), ..., fn(count - 1) on up to `jobs` threads (0: hardware
/// concurrency). Each index runs exactly once; if any throws, the exception of
/// the smallest failing index is rethrown after all threads join.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

struct Stat {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean; 0 for a single sample
};

Stat mean_se(const std::vector<double>& xs);

using SchemeFactory = std::function<fedsim::ExperimentConfig(fedsim::Scheme, std::uint64_t)>;
using SeedFactory = std::function<fedsim::ExperimentConfig(std::uint64_t)>;

/// Runs every configuration; results come back in input order.
std::vector<fedsim::RunResult> run_all(const std::vector<fedsim::ExperimentConfig>& configs,
                                       unsigned jobs);

struct SchemeSummary {
  fedsim::Scheme scheme = fedsim::Scheme::Ours;
  std::size_t seeds = 0;
  Stat final_loss;
  Stat final_sq_dist;
  Stat final_grad_norm_sq;
  std::optional<Stat> final_accuracy;
  std::vector<double> final_losses;      // per seed, in seed order
  std::vector<double> final_accuracies;  // empty without an accuracy metric
  LedgerTotals measured;                 // first seed
  LedgerTotals predicted;
  bool ledger_matches = true;            // every seed equals the closed form
  double beta_coded_symbols = 0.0;       // exponent share of the coded path
  double sync_coded_symbols = 0.0;       // synchronization share of the coded path
};

struct Comparison {
  std::vector<SchemeSummary> rows;
  std::vector<std::vector<fedsim::RunResult>> runs;  // [scheme][seed]
};

/// Every (scheme, seed) pair, run in parallel and aggregated in fixed order.
/// Ledger records are kept for the first seed only.
Comparison compare_schemes(const SchemeFactory& make, const std::vector<fedsim::Scheme>& schemes,
                           const std::vector<std::uint64_t>& seeds, unsigned jobs);

inline constexpr const char* kComparisonHeader =
    "scheme,seeds,final_loss_mean,final_loss_se,final_accuracy_mean,final_accuracy_se,"
    "final_sq_dist_mean,final_sq_dist_se,phys_symbols,coded_symbols,total_symbols,"
    "beta_coded_symbols,sync_coded_symbols,predicted_total_symbols,ledger_matches";

std::string comparison_csv(const Comparison& c);

/// Seed mean and standard error of a per-round metric.
struct Curve {
  std::vector<double> mean;
  std::vector<double> se;
};

Curve sq_dist_curve(const std::vector<fedsim::RunResult>& runs);

/// Least-squares slope of log y against log k over rounds [begin, end].
/// Throws InvalidInput if any y in range is not positive.
double loglog_slope(const std::vector<double>& y, std::size_t begin, std::size_t end);

/// Channel noise floor of the bounds: (v* + Delta^2) omega^2 d for analog
/// schemes, 0 for Coded.
double channel_floor(const fedsim::ExperimentConfig& cfg);

struct ConvexRateReport {
  std::size_t rounds = 0;
  std::size_t seeds = 0;
  Curve sq_dist;
  std::size_t fit_begin = 0;
  std::size_t fit_end = 0;
  double tail_slope = 0.0;
  std::size_t window_begin = 0;  // steady-state window [window_begin, rounds]
  double steady_state = 0.0;     // mean of the seed-mean error over the window
  // eta_k / mu (sigma*^2/m + channel floor), averaged over the window.
  double eta_term = 0.0;
  double transient_term = 0.0;   // exp(-mu T(n) / 2) |theta_0 - theta*|^2
  // Window mean of measured error over the eta-term: the constant the bound
  // needs on this configuration.
  double implied_constant = 0.0;
  bool sync_invariant_held = true;
  std::size_t sync_count = 0;
};

ConvexRateReport verify_convex_rate(const SeedFactory& make, const std::vector<std::uint64_t>& seeds,
                               unsigned jobs);

/// Steady-state error at m and 2m workers; the oracle-noise-free runs give
/// the part that does not come from sigma*.
struct MScalingReport {
  std::size_t m = 0;
  ConvexRateReport base;
  ConvexRateReport doubled;
  double floor_base = 0.0;
  double floor_doubled = 0.0;
  double attributable_base = 0.0;
  double attributable_doubled = 0.0;
  double ratio = 0.0;  // attributable_base / attributable_doubled
};

using ScalingFactory =
    std::function<fedsim::ExperimentConfig(std::size_t m, bool oracle_noise, std::uint64_t seed)>;

MScalingReport verify_m_scaling(const ScalingFactory& make, std::size_t m,
                                const std::vector<std::uint64_t>& seeds, unsigned jobs);

struct NonconvexRateReport {
  std::size_t n0 = 0;
  Stat metric_n0;
  Stat metric_4n0;
  double ratio = 0.0;  // metric(4 n0) / metric(n0)
  // Measured metric over the bound evaluated with a unit constant.
  double implied_constant_n0 = 0.0;
  double implied_constant_4n0 = 0.0;
  bool sync_invariant_held = true;
};

using HorizonFactory = std::function<fedsim::ExperimentConfig(std::size_t n, std::uint64_t seed)>;

NonconvexRateReport verify_nonconvex_rate(const HorizonFactory& make, std::size_t n0,
                               const std::vector<std::uint64_t>& seeds, unsigned jobs);

/// Measured disagreement against its envelope between synchronizations,
/// evaluated with measured worker gradient norms and suboptimality and a unit
/// constant. Requires runs made with track_worker_stats.
struct DisagreementEnvelope {
  std::vector<double> measured;  // seed mean, row k = after round k
  std::vector<double> envelope;
  double max_ratio = 0.0;        // over rows with a positive envelope
  bool zero_at_sync = true;
};

DisagreementEnvelope disagreement_envelope(const std::vector<fedsim::RunResult>& runs,
                                           const fedsim::ExperimentConfig& cfg);

}  // namespace airfed::harness
