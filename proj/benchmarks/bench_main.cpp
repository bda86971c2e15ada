#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "airfed/channel.hpp"
#include "airfed/codec.hpp"
#include "airfed/fedsim.hpp"
#include "airfed/postcode.hpp"

namespace {

using namespace airfed;

void BM_SolveLp(benchmark::State& state) {
  const int q = static_cast<int>(state.range(0));
  const auto grid = channel::make_grid(q);
  const auto p = channel::transition_matrix(grid, 0.25 * grid.delta);
  const auto lp = postcode::build_lp(p, grid);
  for (auto _ : state) benchmark::DoNotOptimize(postcode::solve_lp(lp));
}
BENCHMARK(BM_SolveLp)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_TransmitVector(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto grid = channel::make_grid(8);
  const auto ch = channel::make_channel(0.25 * grid.delta);
  const auto codec = codec::make_codec(0.01, grid.delta);
  const auto pc = postcode::make_postcode(grid, ch.sigma_c);
  std::vector<double> u(d);
  for (std::size_t i = 0; i < d; ++i) u[i] = -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(d);
  std::uint64_t t = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(codec::transmit_vector(u, codec, grid, ch, pc->hm, RngStream(++t)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d));
}
BENCHMARK(BM_TransmitVector)->Arg(16)->Arg(1024);

void BM_ExperimentRounds(benchmark::State& state) {
  const auto scheme = static_cast<fedsim::Scheme>(state.range(0));
  fedsim::ExperimentConfig c;
  c.objective = fedsim::make_quadratic_objective(20, 5, 0.5, 1.0, RngStream(1));
  c.scheme = scheme;
  auto& t = c.transport;
  t.grid = channel::make_grid(16);
  t.channel = channel::make_channel(0.05);
  t.codec = codec::make_codec(1e-3, t.grid.delta);
  t.postcode = std::make_shared<const postcode::Postcode>(*postcode::make_postcode(t.grid, 0.05));
  t.budget = harness::make_budget(32, 2, 0.1, true);
  const auto& k = c.objective->constants();
  c.stepsize = fedsim::constant_stepsize(0.25 / (k.ell_sq + k.smoothness));
  c.sync = fedsim::fixed_sync(fedsim::auto_interval(c.stepsize(1), k.smoothness, 1.0));
  c.rounds = 1000;
  c.keep_ledger_records = false;
  for (auto _ : state) {
    c.seed = static_cast<std::uint64_t>(state.iterations());
    benchmark::DoNotOptimize(fedsim::run_experiment(c));
  }
  state.SetLabel(fedsim::to_string(scheme));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.rounds));
}
BENCHMARK(BM_ExperimentRounds)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
