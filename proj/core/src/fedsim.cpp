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

#include "airfed/fedsim.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "airfed/error.hpp"

namespace airfed::fedsim {

namespace {

using harness::Direction;
using harness::LedgerRecord;

const postcode::PostcodeMatrix* postcode_of(const RoundContext& ctx) {
  if (!traits(ctx.scheme).postcode) return nullptr;
  return &ctx.transport->postcode->hm;
}

Vec decode_levels(const std::vector<int>& levels, const std::vector<int>& beta, bool use_codec,
                  const Transport& tr) {
  if (use_codec) return codec::assemble_vector(levels, beta, tr.grid, tr.codec);
  Vec out(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) out[i] = tr.grid.level(levels[i]);
  return out;
}

double sq_norm(const Vec& v) {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return s;
}

double sq_dist(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

}  // namespace

FedState initial_state(std::size_t m, const Vec& theta0) {
  FedState s;
  s.theta = theta0;
  s.workers.assign(m, theta0);
  return s;
}

UplinkPayload worker_round(const FedState& state, std::size_t worker, const RoundContext& ctx) {
  const Objective& obj = *ctx.objective;
  const Transport& tr = *ctx.transport;
  const std::size_t d = obj.dim();
  const SchemeTraits t = traits(ctx.scheme);

  RngStream data = streams::data(ctx.root, ctx.round, worker);
  Vec g(d);
  obj.sample_gradient(worker, state.workers[worker], data, g);

  UplinkPayload p;
  p.worker = worker;
  LedgerRecord rec{ctx.round, Direction::Up, worker, 0, 0};
  if (!t.physical) {
    p.raw = std::move(g);
    rec.coded_bits = d * static_cast<std::uint64_t>(tr.budget.b);
  } else {
    const RngStream link = streams::link(ctx.root, ctx.round, streams::kUp, worker);
    if (t.codec) {
      codec::EncodedVector e = codec::encode(g, tr.codec);
      p.levels = codec::dac_vector(e.psi, tr.grid, link);
      p.beta = std::move(e.beta);
      rec.coded_bits = d * static_cast<std::uint64_t>(codec::bits_per_exponent(tr.codec));
    } else {
      p.levels = codec::dac_vector(g, tr.grid, link);
    }
    rec.phys_scalars = d;
  }
  if (ctx.ledger) ctx.ledger->add(rec);
  return p;
}

Vec receive_uplink(const UplinkPayload& payload, const RoundContext& ctx) {
  const SchemeTraits t = traits(ctx.scheme);
  if (!t.physical) return payload.raw;
  const Transport& tr = *ctx.transport;
  const RngStream link = streams::link(ctx.root, ctx.round, streams::kUp, payload.worker);
  const std::vector<int> got =
      codec::receive_levels(payload.levels, tr.grid, tr.channel, postcode_of(ctx), link);
  return decode_levels(got, payload.beta, t.codec, tr);
}

AggregateResult server_aggregate(const std::vector<UplinkPayload>& payloads, FedState& state,
                                 const RoundContext& ctx) {
  const Transport& tr = *ctx.transport;
  const SchemeTraits t = traits(ctx.scheme);
  const std::size_t d = state.theta.size();
  AggregateResult out;
  out.u.assign(d, 0.0);
  for (const auto& p : payloads) {
    const Vec v = receive_uplink(p, ctx);
    for (std::size_t i = 0; i < d; ++i) out.u[i] += v[i];
  }
  const double inv_m = 1.0 / static_cast<double>(payloads.size());
  for (auto& x : out.u) x *= inv_m;
  for (std::size_t i = 0; i < d; ++i) state.theta[i] -= ctx.eta * out.u[i];
  state.round = ctx.round;

  DownlinkPayload& dl = out.downlink;
  if (!t.physical) {
    dl.raw = out.u;
  } else {
    const RngStream link = streams::link(ctx.root, ctx.round, streams::kDown, streams::kServer);
    if (t.codec) {
      codec::EncodedVector e = codec::encode(out.u, tr.codec);
      dl.levels = codec::dac_vector(e.psi, tr.grid, link);
      dl.beta = std::move(e.beta);
    } else {
      dl.levels = codec::dac_vector(out.u, tr.grid, link);
    }
  }
  if (t.sync && ctx.sync_round) {
    dl.sync = true;
    dl.theta_sync = state.theta;
  }
  return out;
}

void worker_apply_downlink(FedState& state, std::size_t worker, const DownlinkPayload& downlink,
                           const RoundContext& ctx) {
  const Transport& tr = *ctx.transport;
  const SchemeTraits t = traits(ctx.scheme);
  Vec& theta = state.workers[worker];
  const std::size_t d = theta.size();
  LedgerRecord rec{ctx.round, Direction::Down, worker, 0, 0};
  if (!t.physical) {
    for (std::size_t i = 0; i < d; ++i) theta[i] -= ctx.eta * downlink.raw[i];
    rec.coded_bits = d * static_cast<std::uint64_t>(tr.budget.b);
  } else {
    const RngStream link = streams::link(ctx.root, ctx.round, streams::kDown, worker);
    const std::vector<int> got =
        codec::receive_levels(downlink.levels, tr.grid, tr.channel, postcode_of(ctx), link);
    const Vec v = decode_levels(got, downlink.beta, t.codec, tr);
    for (std::size_t i = 0; i < d; ++i) theta[i] -= ctx.eta * v[i];
    rec.phys_scalars = d;
    if (t.codec) rec.coded_bits = d * static_cast<std::uint64_t>(codec::bits_per_exponent(tr.codec));
  }
  if (downlink.sync) {
    theta = downlink.theta_sync;
    rec.coded_bits += d * static_cast<std::uint64_t>(tr.budget.b);
  }
  if (ctx.ledger) ctx.ledger->add(rec);
}

RunResult run_experiment(const ExperimentConfig& config) {
  if (!config.objective) throw InvalidInput("run_experiment: objective missing");
  if (config.rounds == 0) throw InvalidInput("run_experiment: rounds must be >= 1");
  const Objective& obj = *config.objective;
  const SchemeTraits t = traits(config.scheme);
  if (t.postcode && !config.transport.postcode) {
    throw InvalidInput("run_experiment: scheme " + to_string(config.scheme) +
                       " needs a post-coding matrix");
  }
  const std::size_t n = config.rounds;
  const std::size_t m = obj.workers();
  const std::size_t d = obj.dim();
  const ObjectiveConstants& k = obj.constants();

  RunResult res;
  res.scheme = config.scheme;
  res.seed = config.seed;
  res.ledger = harness::CommLedger(config.keep_ledger_records);

  res.stepsize_report = validate_stepsizes(config.stepsize, k.mu, k.smoothness, k.ell_sq,
                                           config.c0, n, k.mu > 0.0);
  if (t.sync) {
    res.sync_report = validate_sync(config.sync, config.stepsize, k.smoothness, n,
                                    config.sync_slack);
  }
  if (config.validate) {
    if (!res.stepsize_report.ok) {
      throw ScheduleViolation("stepsize schedule: " + res.stepsize_report.summary());
    }
    if (!res.sync_report.ok) {
      throw ScheduleViolation("sync schedule: " + res.sync_report.summary());
    }
  }
  if (t.sync) res.sync_rounds = config.sync.times(n);

  const Vec theta0 = config.theta0.value_or(Vec(d, 0.0));
  if (theta0.size() != d) throw InvalidInput("run_experiment: theta0 has the wrong dimension");
  FedState state = initial_state(m, theta0);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  Vec grad(d);
  const auto snapshot = [&](std::size_t round) {
    RoundMetrics r;
    r.round = round;
    r.loss = obj.value(state.theta);
    obj.gradient(state.theta, grad);
    r.grad_norm_sq = sq_norm(grad);
    r.sq_dist = k.theta_star ? sq_dist(state.theta, *k.theta_star) : nan;
    double dis = 0.0;
    for (const auto& w : state.workers) dis += sq_dist(w, state.theta);
    r.disagreement = dis / static_cast<double>(m);
    const harness::LedgerTotals tot = harness::totals(res.ledger, config.transport.budget);
    r.phys_symbols_cum = tot.phys_symbols;
    r.coded_symbols_cum = tot.coded_symbols;
    r.worker_grad_norm_sq = nan;
    r.worker_suboptimality = nan;
    if (config.track_worker_stats) {
      double gs = 0.0;
      double fs = 0.0;
      const double fmin = k.f_min.value_or(nan);
      for (const auto& w : state.workers) {
        obj.gradient(w, grad);
        gs += sq_norm(grad);
        fs += obj.value(w) - fmin;
      }
      r.worker_grad_norm_sq = gs / static_cast<double>(m);
      r.worker_suboptimality = fs / static_cast<double>(m);
    }
    res.metrics.push_back(r);
  };

  res.metrics.reserve(n + 1);
  snapshot(0);

  RoundContext ctx;
  ctx.objective = &obj;
  ctx.scheme = config.scheme;
  ctx.transport = &config.transport;
  ctx.root = RngStream(config.seed);
  ctx.ledger = &res.ledger;

  std::size_t next_sync = 0;
  std::vector<UplinkPayload> payloads(m);
  for (std::size_t round = 1; round <= n; ++round) {
    ctx.round = round;
    ctx.eta = config.stepsize(round);
    ctx.sync_round = next_sync < res.sync_rounds.size() && res.sync_rounds[next_sync] == round;
    if (ctx.sync_round) ++next_sync;

    for (std::size_t j = 0; j < m; ++j) payloads[j] = worker_round(state, j, ctx);
    const AggregateResult agg = server_aggregate(payloads, state, ctx);
    for (std::size_t j = 0; j < m; ++j) worker_apply_downlink(state, j, agg.downlink, ctx);

    if (ctx.sync_round) {
      for (const auto& w : state.workers) {
        if (std::memcmp(w.data(), state.theta.data(), d * sizeof(double)) != 0) {
          res.sync_invariant_held = false;
        }
      }
    }
    for (const double x : state.theta) {
      if (!std::isfinite(x)) throw InvalidInput("run_experiment: parameters diverged");
    }
    snapshot(round);
  }

  std::vector<double> g(n);
  for (std::size_t r = 0; r < n; ++r) g[r] = res.metrics[r].grad_norm_sq;
  res.expected_grad_norm_sq_R = expectation_over_R(config.stepsize, g);
  res.final_accuracy = obj.accuracy(state.theta);
  res.final_theta = state.theta;
  return res;
}

}  // namespace airfed::fedsim
