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

#include "airfed/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "airfed/error.hpp"

namespace airfed::fedsim {

namespace {

constexpr std::size_t kKeepViolations = 8;
// Partial sums of stepsizes collect rounding; gaps within this relative
// margin of the bound count as meeting it.
constexpr double kSumSlack = 1e-12;

void record(ScheduleReport& rep, Violation v) {
  rep.ok = false;
  ++rep.violation_count;
  if (rep.violations.size() < kKeepViolations) rep.violations.push_back(std::move(v));
}

}  // namespace

double StepsizeSchedule::operator()(std::size_t k) const {
  const auto kk = static_cast<double>(k);
  switch (kind) {
    case StepsizeKind::Constant:
      return eta;
    case StepsizeKind::InverseTime:
      return c / (mu * (kk + k0));
    case StepsizeKind::InverseSqrtHorizon:
      return c / std::sqrt(static_cast<double>(horizon));
    case StepsizeKind::Linear:
      return eta * kk;
  }
  return 0.0;
}

StepsizeSchedule constant_stepsize(double eta) {
  if (!(eta > 0.0)) throw ConfigError("schedule.eta", "must be > 0");
  StepsizeSchedule s;
  s.kind = StepsizeKind::Constant;
  s.eta = eta;
  return s;
}

StepsizeSchedule inverse_time_stepsize(double c, double mu, double k0) {
  if (!(c > 0.0)) throw ConfigError("schedule.c", "must be > 0");
  if (!(mu > 0.0)) throw ConfigError("schedule", "inverse_time needs a strongly convex objective");
  if (!(k0 >= 0.0)) throw ConfigError("schedule.k0", "must be >= 0");
  StepsizeSchedule s;
  s.kind = StepsizeKind::InverseTime;
  s.c = c;
  s.mu = mu;
  s.k0 = k0;
  return s;
}

StepsizeSchedule inverse_sqrt_stepsize(double c, std::size_t horizon) {
  if (!(c > 0.0)) throw ConfigError("schedule.c", "must be > 0");
  if (horizon == 0) throw ConfigError("schedule.rounds", "must be >= 1");
  StepsizeSchedule s;
  s.kind = StepsizeKind::InverseSqrtHorizon;
  s.c = c;
  s.horizon = horizon;
  return s;
}

StepsizeSchedule linear_stepsize(double eta) {
  if (!(eta > 0.0)) throw ConfigError("schedule.eta", "must be > 0");
  StepsizeSchedule s;
  s.kind = StepsizeKind::Linear;
  s.eta = eta;
  return s;
}

double auto_offset(double c, double mu, double ell_sq, double smoothness, double c0) {
  const double k0 = std::ceil(c * (ell_sq + smoothness) / (mu * c0)) - 1.0;
  return std::max(0.0, k0);
}

std::string to_string(StepsizeKind kind) {
  switch (kind) {
    case StepsizeKind::Constant:
      return "constant";
    case StepsizeKind::InverseTime:
      return "inverse_time";
    case StepsizeKind::InverseSqrtHorizon:
      return "inverse_sqrt";
    case StepsizeKind::Linear:
      return "linear";
  }
  return "unknown";
}

std::vector<std::size_t> SyncSchedule::times(std::size_t n) const {
  std::vector<std::size_t> out;
  switch (kind) {
    case SyncKind::None:
      break;
    case SyncKind::FixedInterval:
      for (std::size_t t = interval; interval > 0 && t <= n; t += interval) out.push_back(t);
      break;
    case SyncKind::Geometric: {
      double p = rho;
      while (true) {
        const double t = std::ceil(p);
        if (t > static_cast<double>(n)) break;
        const auto ti = static_cast<std::size_t>(t);
        if (out.empty() || ti > out.back()) out.push_back(ti);
        p *= rho;
      }
      break;
    }
  }
  return out;
}

SyncSchedule geometric_sync(double rho) {
  if (!(rho > 1.0) || !std::isfinite(rho)) throw ConfigError("sync.rho", "must be > 1");
  SyncSchedule s;
  s.kind = SyncKind::Geometric;
  s.rho = rho;
  return s;
}

SyncSchedule fixed_sync(std::size_t interval) {
  if (interval == 0) throw ConfigError("sync.interval", "must be >= 1");
  SyncSchedule s;
  s.kind = SyncKind::FixedInterval;
  s.interval = interval;
  return s;
}

SyncSchedule no_sync() { return SyncSchedule{}; }

std::size_t auto_interval(double eta, double smoothness, double slack) {
  const double raw = std::floor(slack / (2.0 * smoothness * eta) * (1.0 + kSumSlack));
  return raw < 1.0 ? 1 : static_cast<std::size_t>(raw);
}

std::string to_string(SyncKind kind) {
  switch (kind) {
    case SyncKind::Geometric:
      return "geometric";
    case SyncKind::FixedInterval:
      return "fixed";
    case SyncKind::None:
      return "none";
  }
  return "unknown";
}

std::string ScheduleReport::summary() const {
  if (ok) return "ok (" + std::to_string(checked) + " checks)";
  std::string s = std::to_string(violation_count) + " violation(s)";
  for (const auto& v : violations) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "; k=%zu: %s [%.17g > %.17g]", v.k, v.what.c_str(), v.lhs,
                  v.rhs);
    s += buf;
  }
  return s;
}

ScheduleReport validate_stepsizes(const StepsizeSchedule& eta, double mu, double smoothness,
                                  double ell_sq, double c0, std::size_t n, bool check_recursion) {
  ScheduleReport rep;
  const double cap = c0 / (ell_sq + smoothness);
  for (std::size_t k = 1; k <= n; ++k) {
    const double ek = eta(k);
    ++rep.checked;
    if (!(ek > 0.0) || !std::isfinite(ek)) {
      record(rep, {k, ek, 0.0, "eta_k > 0"});
      continue;
    }
    if (ek > cap) record(rep, {k, ek, cap, "eta_k <= c0 / (ell^2 + L)"});
    if (check_recursion) {
      const double next = eta(k + 1);
      const double rhs = (1.0 + next * mu / 8.0) * next;
      ++rep.checked;
      if (ek > rhs) record(rep, {k, ek, rhs, "eta_k <= (1 + eta_{k+1} mu / 8) eta_{k+1}"});
    }
  }
  return rep;
}

ScheduleReport validate_sync(const SyncSchedule& sync, const StepsizeSchedule& eta,
                             double smoothness, std::size_t n, double slack) {
  ScheduleReport rep;
  const double bound = slack / (2.0 * smoothness);
  std::vector<std::size_t> taus = sync.times(n);
  if (taus.empty() || taus.back() != n) taus.push_back(n);
  std::size_t prev = 0;
  double t_prev = 0.0;
  double t = 0.0;
  std::size_t k = 0;
  for (const std::size_t tau : taus) {
    while (k < tau) t += eta(++k);
    const double gap = t - t_prev;
    ++rep.checked;
    if (gap > bound * (1.0 + kSumSlack)) {
      record(rep, {tau, gap, bound,
                   "T(tau_i) - T(tau_{i-1}) <= 1 / (2L) between rounds " + std::to_string(prev) +
                       " and " + std::to_string(tau)});
    }
    prev = tau;
    t_prev = t;
  }
  return rep;
}

std::size_t sample_R(const StepsizeSchedule& eta, std::size_t n, RngStream& rng) {
  if (n == 0) throw InvalidInput("sample_R: n must be >= 1");
  std::vector<double> cum(n);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    acc += eta(k + 1);
    cum[k] = acc;
  }
  const double u = rng.uniform() * acc;
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  return it == cum.end() ? n - 1 : static_cast<std::size_t>(it - cum.begin());
}

double expectation_over_R(const StepsizeSchedule& eta, const std::vector<double>& values) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double w = eta(k + 1);
    num += w * values[k];
    den += w;
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace airfed::fedsim
