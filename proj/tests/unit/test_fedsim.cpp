#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "airfed/error.hpp"
#include "airfed/fedsim.hpp"

namespace airfed::fedsim {
namespace {

Transport make_transport(int q, double sigma_over_delta, double omega) {
  Transport t;
  t.grid = channel::make_grid(q);
  t.channel = channel::make_channel(sigma_over_delta * t.grid.delta);
  t.codec = codec::make_codec(omega, t.grid.delta);
  auto pc = postcode::make_postcode(t.grid, t.channel.sigma_c);
  if (pc) t.postcode = std::make_shared<const postcode::Postcode>(std::move(*pc));
  t.budget = harness::make_budget(32, 2, 0.1, true);
  return t;
}

ExperimentConfig base_config(Scheme scheme, std::uint64_t seed, std::size_t rounds = 200) {
  ExperimentConfig c;
  c.objective = make_quadratic_objective(5, 3, 0.5, 1.0, RngStream(100));
  c.scheme = scheme;
  c.transport = make_transport(8, 0.25, 1e-3);
  const auto& k = c.objective->constants();
  c.stepsize = constant_stepsize(0.25 / (k.ell_sq + k.smoothness));
  c.sync = fixed_sync(auto_interval(c.stepsize(1), k.smoothness, 1.0));
  c.rounds = rounds;
  c.seed = seed;
  c.theta0 = Vec(5, 1.0);
  return c;
}

bool bitwise_equal(const Vec& a, const Vec& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

TEST(RunExperiment, DeterministicPerSeed) {
  for (const auto s : kAllSchemes) {
    const auto a = run_experiment(base_config(s, 7));
    const auto b = run_experiment(base_config(s, 7));
    ASSERT_EQ(a.metrics.size(), b.metrics.size());
    for (std::size_t k = 0; k < a.metrics.size(); ++k) {
      EXPECT_EQ(std::memcmp(&a.metrics[k].loss, &b.metrics[k].loss, sizeof(double)), 0);
    }
    EXPECT_TRUE(bitwise_equal(a.final_theta, b.final_theta));
    const auto c = run_experiment(base_config(s, 8));
    EXPECT_FALSE(bitwise_equal(a.final_theta, c.final_theta));
  }
}

TEST(RunExperiment, SyncRoundsResetDisagreement) {
  for (const auto s : {Scheme::Sync, Scheme::Ours}) {
    const auto r = run_experiment(base_config(s, 3));
    EXPECT_TRUE(r.sync_invariant_held);
    ASSERT_FALSE(r.sync_rounds.empty());
    for (const auto tau : r.sync_rounds) EXPECT_EQ(r.metrics[tau].disagreement, 0.0) << tau;
    // Between synchronizations the noisy downlinks pull workers apart.
    EXPECT_GT(r.metrics[r.sync_rounds.front() - 1].disagreement, 0.0);
  }
}

TEST(RunExperiment, CodedWorkersTrackServerExactly) {
  const auto r = run_experiment(base_config(Scheme::Coded, 3));
  for (const auto& m : r.metrics) EXPECT_EQ(m.disagreement, 0.0);
}

TEST(RunExperiment, LedgerMatchesClosedForm) {
  for (const auto s : kAllSchemes) {
    const auto cfg = base_config(s, 4, 73);
    const auto r = run_experiment(cfg);
    const auto measured = harness::totals(r.ledger, cfg.transport.budget);
    const auto predicted = harness::scheme_ledger(s, 5, 3, 73, cfg.sync, cfg.transport.budget,
                                                  codec::bits_per_exponent(cfg.transport.codec));
    EXPECT_EQ(measured, predicted) << to_string(s);
    EXPECT_EQ(r.ledger.records().size(), 2u * 3u * 73u);
    EXPECT_EQ(r.metrics.back().coded_symbols_cum, measured.coded_symbols);
  }
}

TEST(RunExperiment, DecayingStepsizeLowersLoss) {
  // eta_k = 1 / (L k) with exact-arithmetic transport.
  std::vector<double> mean(4, 0.0);
  const std::size_t checkpoints[] = {0, 10, 50, 400};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto cfg = base_config(Scheme::Coded, seed, 400);
    const auto& k = cfg.objective->constants();
    cfg.stepsize = inverse_time_stepsize(k.mu / k.smoothness, k.mu, 0.0);
    cfg.validate = false;
    const auto r = run_experiment(cfg);
    for (int i = 0; i < 4; ++i) mean[i] += r.metrics[checkpoints[i]].loss / 20;
  }
  for (int i = 1; i < 4; ++i) EXPECT_LT(mean[i], mean[i - 1]);
}

TEST(RunExperiment, RejectsInvalidSchedulesBeforeRunning) {
  auto cfg = base_config(Scheme::Ours, 1);
  cfg.stepsize = linear_stepsize(1.0);
  EXPECT_THROW(run_experiment(cfg), ScheduleViolation);
  auto sync = base_config(Scheme::Ours, 1);
  sync.sync = no_sync();
  EXPECT_THROW(run_experiment(sync), ScheduleViolation);
  // Schemes without synchronization ignore the sync schedule.
  auto noisy = base_config(Scheme::Noisy, 1);
  noisy.sync = no_sync();
  EXPECT_NO_THROW(run_experiment(noisy));
}

TEST(RunExperiment, PostcodeSchemesNeedAMatrix) {
  auto cfg = base_config(Scheme::Postcode, 1);
  cfg.transport.postcode.reset();
  EXPECT_THROW(run_experiment(cfg), InvalidInput);
}

TEST(WorkerRound, SchemesShareDataStreams) {
  const auto cfg = base_config(Scheme::Coded, 5);
  const FedState state = initial_state(3, *cfg.theta0);
  RoundContext ctx;
  ctx.objective = cfg.objective.get();
  ctx.scheme = Scheme::Coded;
  ctx.transport = &cfg.transport;
  ctx.round = 4;
  ctx.root = RngStream(5);
  const auto p = worker_round(state, 1, ctx);
  Vec g(5);
  RngStream data = streams::data(ctx.root, 4, 1);
  cfg.objective->sample_gradient(1, state.workers[1], data, g);
  EXPECT_TRUE(bitwise_equal(p.raw, g));
}

TEST(ReceiveUplink, UnbiasedThroughTheFullStack) {
  const auto cfg = base_config(Scheme::Ours, 6);
  RoundContext ctx;
  ctx.objective = cfg.objective.get();
  ctx.scheme = Scheme::Ours;
  ctx.transport = &cfg.transport;
  ctx.round = 1;
  const Vec g{0.3, -1.2, 0.05, 2.5, -0.7};
  const int trials = 100000;
  Vec s(5, 0.0), s2(5, 0.0);
  for (int t = 0; t < trials; ++t) {
    ctx.root = RngStream(static_cast<std::uint64_t>(t));
    UplinkPayload p;
    p.worker = 0;
    const auto link = streams::link(ctx.root, 1, streams::kUp, 0);
    auto e = codec::encode(g, cfg.transport.codec);
    p.levels = codec::dac_vector(e.psi, cfg.transport.grid, link);
    p.beta = e.beta;
    const Vec v = receive_uplink(p, ctx);
    for (int i = 0; i < 5; ++i) {
      s[i] += v[i];
      s2[i] += v[i] * v[i];
    }
  }
  for (int i = 0; i < 5; ++i) {
    const double mean = s[i] / trials;
    const double se = std::sqrt((s2[i] / trials - mean * mean) / trials);
    EXPECT_NEAR(mean, g[i], 5 * se) << i;
  }
}

TEST(RunExperiment, NoisyHasWorseSteadyStateThanOurs) {
  double noisy = 0, ours = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto a = base_config(Scheme::Noisy, seed, 600);
    auto b = base_config(Scheme::Ours, seed, 600);
    a.transport = b.transport = make_transport(8, 0.5, 1e-3);
    noisy += run_experiment(a).metrics.back().sq_dist;
    ours += run_experiment(b).metrics.back().sq_dist;
  }
  EXPECT_GT(noisy, ours);
}

}  // namespace
}  // namespace airfed::fedsim
