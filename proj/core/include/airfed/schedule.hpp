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

#include "airfed/rng.hpp"

namespace airfed::fedsim {

enum class StepsizeKind { Constant, InverseTime, InverseSqrtHorizon, Linear };

/// eta_k for k >= 1.
///   Constant:            eta
///   InverseTime:         c / (mu (k + k0))
///   InverseSqrtHorizon:  c / sqrt(horizon)
///   Linear:              eta k  (increasing; exists to exercise the validator)
struct StepsizeSchedule {
  StepsizeKind kind = StepsizeKind::Constant;
  double eta = 0.0;
  double c = 0.0;
  double mu = 0.0;
  double k0 = 0.0;
  std::size_t horizon = 0;

  double operator()(std::size_t k) const;
};

StepsizeSchedule constant_stepsize(double eta);
StepsizeSchedule inverse_time_stepsize(double c, double mu, double k0);
StepsizeSchedule inverse_sqrt_stepsize(double c, std::size_t horizon);
StepsizeSchedule linear_stepsize(double eta);

/// Smallest offset with c / (mu (1 + k0)) <= c0 / (ell_sq + L).
double auto_offset(double c, double mu, double ell_sq, double smoothness, double c0);

std::string to_string(StepsizeKind kind);

enum class SyncKind { Geometric, FixedInterval, None };

/// tau_i = ceil(rho^i) with duplicates removed (geometric), tau_i = i *
/// interval (fixed), or no synchronization.
struct SyncSchedule {
  SyncKind kind = SyncKind::None;
  double rho = 0.0;
  std::size_t interval = 0;

  /// Sync rounds in [1, n], increasing.
  std::vector<std::size_t> times(std::size_t n) const;
};

SyncSchedule geometric_sync(double rho);
SyncSchedule fixed_sync(std::size_t interval);
SyncSchedule no_sync();

/// Largest fixed interval with interval * eta <= slack / (2 L) for a constant
/// stepsize eta; at least 1.
std::size_t auto_interval(double eta, double smoothness, double slack);

std::string to_string(SyncKind kind);

struct Violation {
  std::size_t k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string what;
};

struct ScheduleReport {
  bool ok = true;
  std::size_t checked = 0;
  std::vector<Violation> violations;  // first few only
  std::size_t violation_count = 0;

  std::string summary() const;
};

/// eta_k <= c0 / (ell_sq + L) for k <= n and, when `check_recursion` is set
/// (strongly convex regime), eta_k <= (1 + eta_{k+1} mu / 8) eta_{k+1}.
ScheduleReport validate_stepsizes(const StepsizeSchedule& eta, double mu, double smoothness,
                                  double ell_sq, double c0, std::size_t n,
                                  bool check_recursion = true);

/// T(tau_i) - T(tau_{i-1}) <= slack / (2 L) with tau_0 = 0, including the
/// open segment from the last sync to round n.
ScheduleReport validate_sync(const SyncSchedule& sync, const StepsizeSchedule& eta,
                             double smoothness, std::size_t n, double slack = 1.0);

/// R in {0, ..., n-1} with P(R = k) proportional to eta_{k+1}.
std::size_t sample_R(const StepsizeSchedule& eta, std::size_t n, RngStream& rng);

/// sum_{k=0}^{n-1} eta_{k+1} values[k] / sum eta: the exact expectation of
/// values[R].
double expectation_over_R(const StepsizeSchedule& eta, const std::vector<double>& values);

}  // namespace airfed::fedsim
