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
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "airfed/channel.hpp"
#include "airfed/cli.hpp"
#include "airfed/codec.hpp"
#include "airfed/config.hpp"
#include "airfed/diagnostics.hpp"
#include "airfed/fedsim.hpp"
#include "airfed/harness.hpp"
#include "airfed/postcode.hpp"

namespace airfed::cli {

/// Two-column key,value CSV.
struct KeyValues {
  std::vector<std::pair<std::string, std::string>> rows;

  void add(const std::string& key, double v);
  void add(const std::string& key, std::uint64_t v);
  void add(const std::string& key, bool v);
  void add(const std::string& key, const std::string& v);
  std::string csv() const;
};

std::string matrix_csv(const Matrix& h);
std::string certificate_csv(const postcode::CertificationReport& rep);
std::string fmt(const char* f, double v);
std::string lower_name(fedsim::Scheme s);

struct PostcodeAnalysis {
  channel::QuantizationGrid grid;
  double sigma_c = 0.0;
  channel::TransitionMatrix p;
  bool lp_ran = false;
  postcode::LpSolution lp;
  std::optional<postcode::PostcodeMatrix> hm;
  postcode::PostcodePath path = postcode::PostcodePath::Lp;
  postcode::CertificationReport cert;
  std::optional<postcode::Construction> construction;
  double construction_lp_violation = 0.0;
  double four_delta_sq = 0.0;

  void summarize(KeyValues& kv) const;
};

/// LP solve, certification and construction cross-check for one grid and
/// noise level.
PostcodeAnalysis analyze_postcode(const config::GridChannelSpec& spec);

struct PipelineRun {
  channel::QuantizationGrid grid;
  channel::AwgnChannel channel;
  codec::ScaleCodec codec;
  postcode::PostcodeMatrix hm;
  bool negative_control = false;
  harness::PipelineDiagnostics diag;

  void write(Artifacts& out) const;
};

PipelineRun run_pipeline_diagnostics(const config::Document& doc);

struct Experiment {
  config::ExperimentSpec spec;
  std::shared_ptr<const fedsim::Objective> objective;
  fedsim::Transport transport;

  fedsim::ExperimentConfig make(fedsim::Scheme s, std::uint64_t seed) const;
};

Experiment prepare_experiment(const config::ExperimentSpec& spec);

struct SimulateResult {
  harness::Comparison comparison;
  Artifacts artifacts;
};

/// Throws ScheduleViolation before running anything if a schedule is invalid.
SimulateResult simulate(const Experiment& e, const nlohmann::json& metadata, unsigned jobs);

}  // namespace airfed::cli
