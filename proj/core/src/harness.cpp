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

#include "airfed/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "airfed/codec.hpp"
#include "airfed/csv.hpp"
#include "airfed/error.hpp"

namespace airfed::harness {

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(jobs, count);

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;

  const auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };

  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

Stat mean_se(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (const double x : xs) sum += x;
  s.mean = sum / n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (const double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return s;
}

std::vector<fedsim::RunResult> run_all(const std::vector<fedsim::ExperimentConfig>& configs,
                                       unsigned jobs) {
  std::vector<fedsim::RunResult> out(configs.size());
  parallel_for(configs.size(), jobs,
               [&](std::size_t i) { out[i] = fedsim::run_experiment(configs[i]); });
  return out;
}

namespace {

std::uint64_t exponent_bits(const fedsim::ExperimentConfig& cfg) {
  const auto& t = cfg.transport;
  if (!fedsim::traits(cfg.scheme).codec) return 0;
  const std::uint64_t n = cfg.rounds;
  const std::uint64_t m = cfg.objective->workers();
  const std::uint64_t d = cfg.objective->dim();
  return 2 * n * m * d * static_cast<std::uint64_t>(codec::bits_per_exponent(t.codec));
}

std::uint64_t sync_bits(const fedsim::ExperimentConfig& cfg) {
  if (!fedsim::traits(cfg.scheme).sync) return 0;
  const std::uint64_t m = cfg.objective->workers();
  const std::uint64_t d = cfg.objective->dim();
  return cfg.sync.times(cfg.rounds).size() * m * d *
         static_cast<std::uint64_t>(cfg.transport.budget.b);
}

LedgerTotals predicted_totals(const fedsim::ExperimentConfig& cfg) {
  return scheme_ledger(cfg.scheme, cfg.objective->dim(), cfg.objective->workers(), cfg.rounds,
                       cfg.sync, cfg.transport.budget,
                       codec::bits_per_exponent(cfg.transport.codec));
}

}  // namespace

Comparison compare_schemes(const SchemeFactory& make, const std::vector<fedsim::Scheme>& schemes,
                           const std::vector<std::uint64_t>& seeds, unsigned jobs) {
  const std::size_t ns = schemes.size();
  const std::size_t nseed = seeds.size();
  std::vector<fedsim::ExperimentConfig> configs;
  configs.reserve(ns * nseed);
  for (const auto s : schemes) {
    for (std::size_t i = 0; i < nseed; ++i) {
      auto cfg = make(s, seeds[i]);
      cfg.keep_ledger_records = i == 0;
      configs.push_back(std::move(cfg));
    }
  }
  std::vector<fedsim::RunResult> flat = run_all(configs, jobs);

  Comparison c;
  c.runs.resize(ns);
  for (std::size_t si = 0; si < ns; ++si) {
    const auto& cfg = configs[si * nseed];
    SchemeSummary row;
    row.scheme = schemes[si];
    row.seeds = nseed;
    row.predicted = predicted_totals(cfg);
    row.beta_coded_symbols = coded_symbols(exponent_bits(cfg), cfg.transport.budget);
    row.sync_coded_symbols = coded_symbols(sync_bits(cfg), cfg.transport.budget);
    std::vector<double> sq, gn;
    for (std::size_t i = 0; i < nseed; ++i) {
      fedsim::RunResult& r = flat[si * nseed + i];
      const auto& last = r.metrics.back();
      row.final_losses.push_back(last.loss);
      sq.push_back(last.sq_dist);
      gn.push_back(last.grad_norm_sq);
      if (r.final_accuracy) row.final_accuracies.push_back(*r.final_accuracy);
      const LedgerTotals t = totals(r.ledger, cfg.transport.budget);
      if (i == 0) row.measured = t;
      if (!(t == row.predicted)) row.ledger_matches = false;
      c.runs[si].push_back(std::move(r));
    }
    row.final_loss = mean_se(row.final_losses);
    row.final_sq_dist = mean_se(sq);
    row.final_grad_norm_sq = mean_se(gn);
    if (row.final_accuracies.size() == nseed) row.final_accuracy = mean_se(row.final_accuracies);
    c.rows.push_back(std::move(row));
  }
  return c;
}

std::string comparison_csv(const Comparison& c) {
  std::ostringstream os;
  os << kComparisonHeader << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : c.rows) {
    os << fedsim::to_string(r.scheme) << ',' << r.seeds << ',' << format_double(r.final_loss.mean)
       << ',' << format_double(r.final_loss.se) << ','
       << format_double(r.final_accuracy ? r.final_accuracy->mean : nan) << ','
       << format_double(r.final_accuracy ? r.final_accuracy->se : nan) << ','
       << format_double(r.final_sq_dist.mean) << ',' << format_double(r.final_sq_dist.se) << ','
       << format_double(r.measured.phys_symbols) << ',' << format_double(r.measured.coded_symbols)
       << ',' << format_double(r.measured.total_symbols) << ','
       << format_double(r.beta_coded_symbols) << ',' << format_double(r.sync_coded_symbols) << ','
       << format_double(r.predicted.total_symbols) << ',' << (r.ledger_matches ? 1 : 0) << '\n';
  }
  return os.str();
}

Curve sq_dist_curve(const std::vector<fedsim::RunResult>& runs) {
  Curve c;
  if (runs.empty()) return c;
  const std::size_t rows = runs.front().metrics.size();
  c.mean.resize(rows);
  c.se.resize(rows);
  std::vector<double> xs(runs.size());
  for (std::size_t k = 0; k < rows; ++k) {
    for (std::size_t i = 0; i < runs.size(); ++i) xs[i] = runs[i].metrics.at(k).sq_dist;
    const Stat s = mean_se(xs);
    c.mean[k] = s.mean;
    c.se[k] = s.se;
  }
  return c;
}

double loglog_slope(const std::vector<double>& y, std::size_t begin, std::size_t end) {
  if (begin == 0 || end < begin + 1 || end >= y.size()) {
    throw InvalidInput("loglog_slope: need 1 <= begin < end < size");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(end - begin + 1);
  for (std::size_t k = begin; k <= end; ++k) {
    if (!(y[k] > 0.0)) throw InvalidInput("loglog_slope: non-positive value");
    const double lx = std::log(static_cast<double>(k));
    const double ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double channel_floor(const fedsim::ExperimentConfig& cfg) {
  const auto tr = fedsim::traits(cfg.scheme);
  if (!tr.physical) return 0.0;
  const auto& t = cfg.transport;
  const double vstar = (tr.postcode && t.postcode) ? t.postcode->hm.v_star() : 0.0;
  const double omega = tr.codec ? t.codec.omega : 0.0;
  return (vstar + t.grid.delta * t.grid.delta) * omega * omega *
         static_cast<double>(cfg.objective->dim());
}

namespace {

ConvexRateReport convex_rate_from(const std::vector<fedsim::RunResult>& runs,
                             const fedsim::ExperimentConfig& cfg) {
  ConvexRateReport rep;
  const auto k = cfg.objective->constants();
  if (!(k.mu > 0.0) || !k.theta_star) {
    throw InvalidInput("verify_convex_rate: needs a strongly convex objective with known optimum");
  }
  const std::size_t n = cfg.rounds;
  rep.rounds = n;
  rep.seeds = runs.size();
  rep.sq_dist = sq_dist_curve(runs);
  rep.fit_begin = std::max<std::size_t>(1, n / 10);
  rep.fit_end = n;
  rep.tail_slope = loglog_slope(rep.sq_dist.mean, rep.fit_begin, rep.fit_end);

  const double m = static_cast<double>(cfg.objective->workers());
  const double noise = k.sigma_star_sq_mean() / m + channel_floor(cfg);
  rep.window_begin = n - n / 10;
  double steady = 0.0, term = 0.0, ratio = 0.0;
  for (std::size_t r = rep.window_begin; r <= n; ++r) {
    const double bound = cfg.stepsize(r) / k.mu * noise;
    steady += rep.sq_dist.mean[r];
    term += bound;
    ratio += rep.sq_dist.mean[r] / bound;
  }
  const double w = static_cast<double>(n - rep.window_begin + 1);
  rep.steady_state = steady / w;
  rep.eta_term = term / w;
  rep.implied_constant = ratio / w;

  double big_t = 0.0;
  for (std::size_t r = 1; r <= n; ++r) big_t += cfg.stepsize(r);
  const fedsim::Vec theta0 = cfg.theta0.value_or(fedsim::Vec(cfg.objective->dim(), 0.0));
  double d0 = 0.0;
  for (std::size_t i = 0; i < theta0.size(); ++i) {
    d0 += (theta0[i] - (*k.theta_star)[i]) * (theta0[i] - (*k.theta_star)[i]);
  }
  rep.transient_term = std::exp(-k.mu * big_t / 2.0) * d0;

  for (const auto& r : runs) rep.sync_invariant_held = rep.sync_invariant_held && r.sync_invariant_held;
  rep.sync_count = runs.empty() ? 0 : runs.front().sync_rounds.size();
  return rep;
}

std::vector<fedsim::ExperimentConfig> per_seed(const SeedFactory& make,
                                               const std::vector<std::uint64_t>& seeds) {
  std::vector<fedsim::ExperimentConfig> cfgs;
  cfgs.reserve(seeds.size());
  for (const auto s : seeds) {
    auto cfg = make(s);
    cfg.keep_ledger_records = false;
    cfgs.push_back(std::move(cfg));
  }
  return cfgs;
}

}  // namespace

ConvexRateReport verify_convex_rate(const SeedFactory& make, const std::vector<std::uint64_t>& seeds,
                               unsigned jobs) {
  if (seeds.empty()) throw InvalidInput("verify_convex_rate: no seeds");
  const auto cfgs = per_seed(make, seeds);
  return convex_rate_from(run_all(cfgs, jobs), cfgs.front());
}

MScalingReport verify_m_scaling(const ScalingFactory& make, std::size_t m,
                                const std::vector<std::uint64_t>& seeds, unsigned jobs) {
  if (seeds.empty()) throw InvalidInput("verify_m_scaling: no seeds");
  // One pool for all four batches keeps the threads busy.
  const std::size_t ns = seeds.size();
  std::vector<fedsim::ExperimentConfig> cfgs;
  cfgs.reserve(4 * ns);
  for (const std::size_t mm : {m, 2 * m}) {
    for (const bool noisy : {true, false}) {
      for (const auto s : seeds) {
        auto cfg = make(mm, noisy, s);
        cfg.keep_ledger_records = false;
        cfgs.push_back(std::move(cfg));
      }
    }
  }
  std::vector<fedsim::RunResult> all = run_all(cfgs, jobs);
  const auto batch = [&](std::size_t b) {
    return std::vector<fedsim::RunResult>(all.begin() + static_cast<std::ptrdiff_t>(b * ns),
                                          all.begin() + static_cast<std::ptrdiff_t>((b + 1) * ns));
  };
  MScalingReport rep;
  rep.m = m;
  rep.base = convex_rate_from(batch(0), cfgs[0]);
  rep.floor_base = convex_rate_from(batch(1), cfgs[ns]).steady_state;
  rep.doubled = convex_rate_from(batch(2), cfgs[2 * ns]);
  rep.floor_doubled = convex_rate_from(batch(3), cfgs[3 * ns]).steady_state;
  rep.attributable_base = rep.base.steady_state - rep.floor_base;
  rep.attributable_doubled = rep.doubled.steady_state - rep.floor_doubled;
  rep.ratio = rep.attributable_base / rep.attributable_doubled;
  return rep;
}

namespace {

double nonconvex_rate_bound(const fedsim::ExperimentConfig& cfg) {
  const auto k = cfg.objective->constants();
  const double m = static_cast<double>(cfg.objective->workers());
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t r = 1; r <= cfg.rounds; ++r) {
    const double e = cfg.stepsize(r);
    s1 += e;
    s2 += e * e;
  }
  const fedsim::Vec theta0 = cfg.theta0.value_or(fedsim::Vec(cfg.objective->dim(), 0.0));
  const double gap = cfg.objective->value(theta0) - k.f_min.value_or(0.0);
  const double noise = k.sigma_star_sq_mean() / m + channel_floor(cfg);
  return (gap + k.smoothness * noise * s2) / s1;
}

}  // namespace

NonconvexRateReport verify_nonconvex_rate(const HorizonFactory& make, std::size_t n0,
                               const std::vector<std::uint64_t>& seeds, unsigned jobs) {
  if (seeds.empty()) throw InvalidInput("verify_nonconvex_rate: no seeds");
  if (n0 == 0) throw InvalidInput("verify_nonconvex_rate: n0 must be >= 1");
  const std::size_t ns = seeds.size();
  std::vector<fedsim::ExperimentConfig> cfgs;
  for (const std::size_t n : {n0, 4 * n0}) {
    for (const auto s : seeds) {
      auto cfg = make(n, s);
      cfg.keep_ledger_records = false;
      cfgs.push_back(std::move(cfg));
    }
  }
  const auto runs = run_all(cfgs, jobs);
  NonconvexRateReport rep;
  rep.n0 = n0;
  std::vector<double> a, b;
  for (std::size_t i = 0; i < ns; ++i) {
    a.push_back(runs[i].expected_grad_norm_sq_R);
    b.push_back(runs[ns + i].expected_grad_norm_sq_R);
  }
  for (const auto& r : runs) rep.sync_invariant_held = rep.sync_invariant_held && r.sync_invariant_held;
  rep.metric_n0 = mean_se(a);
  rep.metric_4n0 = mean_se(b);
  rep.ratio = rep.metric_4n0.mean / rep.metric_n0.mean;
  rep.implied_constant_n0 = rep.metric_n0.mean / nonconvex_rate_bound(cfgs[0]);
  rep.implied_constant_4n0 = rep.metric_4n0.mean / nonconvex_rate_bound(cfgs[ns]);
  return rep;
}

DisagreementEnvelope disagreement_envelope(const std::vector<fedsim::RunResult>& runs,
                                           const fedsim::ExperimentConfig& cfg) {
  if (runs.empty()) throw InvalidInput("disagreement_envelope: no runs");
  DisagreementEnvelope env;
  const auto k = cfg.objective->constants();
  const std::size_t n = cfg.rounds;
  const double m = static_cast<double>(cfg.objective->workers());
  const auto& t = cfg.transport;
  const auto tr = fedsim::traits(cfg.scheme);
  const double vstar = (tr.postcode && t.postcode) ? t.postcode->hm.v_star() : 0.0;
  const double scale = vstar + t.grid.delta * t.grid.delta;
  const double omega = t.codec.omega;
  const double base = k.sigma_star_sq_mean() / m + omega * omega * static_cast<double>(cfg.objective->dim());
  const bool convex = k.mu > 0.0;

  const double ns = static_cast<double>(runs.size());
  std::vector<double> grad(n + 1, 0.0), sub(n + 1, 0.0);
  env.measured.assign(n + 1, 0.0);
  for (const auto& r : runs) {
    if (r.metrics.size() != n + 1) throw InvalidInput("disagreement_envelope: row count mismatch");
    for (std::size_t row = 0; row <= n; ++row) {
      const auto& mt = r.metrics[row];
      if (std::isnan(mt.worker_grad_norm_sq)) {
        throw InvalidInput("disagreement_envelope: runs lack worker statistics");
      }
      env.measured[row] += mt.disagreement / ns;
      grad[row] += mt.worker_grad_norm_sq / ns;
      sub[row] += (convex ? mt.worker_suboptimality : 0.0) / ns;
    }
  }

  const std::vector<std::size_t> syncs = tr.sync ? cfg.sync.times(n) : std::vector<std::size_t>{};
  std::vector<bool> is_sync(n + 1, false);
  for (const auto s : syncs) is_sync[s] = true;

  env.envelope.assign(n + 1, 0.0);
  // Row k holds the disagreement of theta_k; its envelope sums rounds t from
  // the last sync up to k + 1, each evaluated at the state before round t.
  double acc = 0.0;
  for (std::size_t row = 0; row <= n; ++row) {
    if (is_sync[row]) {
      acc = 0.0;
      if (env.measured[row] != 0.0) env.zero_at_sync = false;
    }
    const std::size_t tt = row + 1;
    const double e = cfg.stepsize(tt);
    const double state = convex ? grad[tt - 1] + k.ell_sq / m * sub[tt - 1]
                                : (1.0 + k.lambda) * grad[tt - 1];
    acc += e * e * (base + state);
    env.envelope[row] = scale * acc;
    if (env.envelope[row] > 0.0) {
      env.max_ratio = std::max(env.max_ratio, env.measured[row] / env.envelope[row]);
    }
  }
  return env;
}

}  // namespace airfed::harness
