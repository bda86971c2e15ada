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
#include <memory>
#include <optional>
#include <vector>

#include "airfed/channel.hpp"
#include "airfed/codec.hpp"
#include "airfed/ledger.hpp"
#include "airfed/objective.hpp"
#include "airfed/postcode.hpp"
#include "airfed/rng.hpp"
#include "airfed/schedule.hpp"
#include "airfed/scheme.hpp"

namespace airfed::fedsim {

/// Channel and codec context shared by every link of a run. `postcode` is
/// required by schemes that post-code and ignored otherwise.
struct Transport {
  channel::QuantizationGrid grid;
  channel::AwgnChannel channel;
  codec::ScaleCodec codec;
  std::shared_ptr<const postcode::Postcode> postcode;
  harness::ChannelBudget budget;
};

/// Stream derivation. Every random quantity of a run is a child of the root
/// stream, addressed by what it is for, so that schemes sharing a seed see
/// identical data and a link's noise never depends on evaluation order.
namespace streams {
inline constexpr std::uint64_t kData = 1;
inline constexpr std::uint64_t kLink = 2;
inline constexpr std::uint64_t kUp = 1;
inline constexpr std::uint64_t kDown = 2;
inline constexpr std::uint64_t kServer = ~std::uint64_t{0};

inline RngStream data(const RngStream& root, std::size_t round, std::size_t worker) {
  return root.child({kData, round, worker});
}
inline RngStream link(const RngStream& root, std::size_t round, std::uint64_t direction,
                      std::uint64_t endpoint) {
  return root.child({kLink, round, direction, endpoint});
}
}  // namespace streams

struct FedState {
  std::size_t round = 0;
  Vec theta;
  std::vector<Vec> workers;
};

FedState initial_state(std::size_t m, const Vec& theta0);

/// Context of one round k.
struct RoundContext {
  const Objective* objective = nullptr;
  Scheme scheme = Scheme::Ours;
  const Transport* transport = nullptr;
  std::size_t round = 0;
  double eta = 0.0;
  bool sync_round = false;
  RngStream root{0};
  harness::CommLedger* ledger = nullptr;
};

/// What a worker puts on the wire. Coded carries `raw`; the analog schemes
/// carry DAC level indices, plus exponents when the codec is in use.
struct UplinkPayload {
  std::size_t worker = 0;
  Vec raw;
  std::vector<int> levels;
  std::vector<int> beta;
};

struct DownlinkPayload {
  Vec raw;
  std::vector<int> levels;
  std::vector<int> beta;
  bool sync = false;
  Vec theta_sync;
};

UplinkPayload worker_round(const FedState& state, std::size_t worker, const RoundContext& ctx);

struct AggregateResult {
  Vec u;
  DownlinkPayload downlink;
};

/// Receives every uplink through its own noisy link, averages, steps the
/// server parameter and prepares the broadcast.
AggregateResult server_aggregate(const std::vector<UplinkPayload>& payloads, FedState& state,
                                 const RoundContext& ctx);

/// Receives the broadcast through worker j's own downlink noise, applies it,
/// and on sync rounds overwrites the worker with the server parameter.
void worker_apply_downlink(FedState& state, std::size_t worker, const DownlinkPayload& downlink,
                           const RoundContext& ctx);

/// Decoded value of one uplink at the server (exposed for Monte Carlo tests).
Vec receive_uplink(const UplinkPayload& payload, const RoundContext& ctx);

struct ExperimentConfig {
  std::shared_ptr<const Objective> objective;
  Scheme scheme = Scheme::Ours;
  Transport transport;
  StepsizeSchedule stepsize;
  SyncSchedule sync;
  std::size_t rounds = 0;
  std::uint64_t seed = 0;
  std::optional<Vec> theta0;
  double c0 = 0.5;
  double sync_slack = 1.0;
  bool validate = true;
  bool keep_ledger_records = true;
  // Also record mean |grad F(theta^(j))|^2 and mean F(theta^(j)) - F_min.
  bool track_worker_stats = false;
};

struct RoundMetrics {
  std::size_t round = 0;
  double loss = 0.0;
  double sq_dist = 0.0;
  double grad_norm_sq = 0.0;
  double disagreement = 0.0;
  double phys_symbols_cum = 0.0;
  double coded_symbols_cum = 0.0;
  double worker_grad_norm_sq = 0.0;
  double worker_suboptimality = 0.0;
};

struct RunResult {
  Scheme scheme = Scheme::Ours;
  std::uint64_t seed = 0;
  // Row k describes the state after round k; row 0 is the initial state.
  std::vector<RoundMetrics> metrics;
  harness::CommLedger ledger;
  std::vector<std::size_t> sync_rounds;
  bool sync_invariant_held = true;
  std::optional<double> final_accuracy;
  // Exact E |grad F(theta_R)|^2 over the stepsize-weighted R.
  double expected_grad_norm_sq_R = 0.0;
  ScheduleReport stepsize_report;
  ScheduleReport sync_report;
  Vec final_theta;
};

/// Validates the schedules (throws ScheduleViolation before round 1 when
/// `validate` is set and they fail) and runs the scheme for `rounds` rounds.
RunResult run_experiment(const ExperimentConfig& config);

}  // namespace airfed::fedsim
