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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "airfed/fedsim.hpp"
#include "airfed/ledger.hpp"
#include "airfed/objective.hpp"
#include "airfed/schedule.hpp"
#include "airfed/scheme.hpp"

/// JSON experiment documents. Every parse error is a ConfigError whose path
/// names the offending field, e.g. "channel.sigma_c".
namespace airfed::config {

using json = nlohmann::json;

struct GridChannelSpec {
  int q = 0;
  double sigma_c = 0.0;
};

struct CodecSpec {
  double omega = 0.0;
  int beta_max = 63;
};

struct ObjectiveSpec {
  std::string kind = "quadratic";  // quadratic | nonconvex | logistic
  std::size_t d = 20;
  std::size_t m = 5;
  double heterogeneity = 0.0;
  double noise = 1.0;
  double a = 0.5;
  double b = 2.0;
  std::uint64_t seed = 0;
  fedsim::LogisticParams logistic;
};

struct StepsizeSpec {
  fedsim::StepsizeKind kind = fedsim::StepsizeKind::Constant;
  double eta = 0.0;
  double c = 0.0;
  std::optional<double> k0;  // nullopt: smallest offset meeting the cap
  double c0 = 0.5;
};

struct SyncSpec {
  fedsim::SyncKind kind = fedsim::SyncKind::None;
  double rho = 0.0;
  std::optional<std::size_t> interval;  // nullopt: largest interval meeting the budget
  double slack = 1.0;
};

struct ExperimentSpec {
  GridChannelSpec channel;
  CodecSpec codec;
  ObjectiveSpec objective;
  StepsizeSpec stepsize;
  SyncSpec sync;
  std::size_t rounds = 0;
  std::vector<fedsim::Scheme> schemes;
  std::vector<std::uint64_t> seeds;
  harness::ChannelBudget budget;
  std::optional<fedsim::Vec> theta0;  // a scalar in the document fills every coordinate
  double theta0_fill = 0.0;
  bool has_theta0_fill = false;
};

struct ProbeSpec {
  std::string kind = "uniform";  // uniform | zero | values
  std::size_t d = 16;
  double low = -2.0;
  double high = 2.0;
  std::vector<double> values;
  std::size_t trials = 100000;
  std::uint64_t seed = 0;
};

enum class NegativeControl { None, MisnormalizedRows };

struct Document {
  json raw;
  std::string directory;  // of the config file, for relative paths
};

Document load(const std::string& path);
Document parse(const std::string& text);

GridChannelSpec parse_grid_channel(const json& j);
CodecSpec parse_codec(const json& j);
ProbeSpec parse_probe(const json& j);
NegativeControl parse_negative_control(const json& j);
ExperimentSpec parse_experiment(const json& j);

/// Replaces the seed list by {seed}, or the base of a {base, count} range.
void override_seed(json& j, std::uint64_t seed);

std::shared_ptr<const fedsim::Objective> build_objective(const ObjectiveSpec& spec);

/// Throws Infeasible when no post-coding matrix exists.
fedsim::Transport build_transport(const ExperimentSpec& spec);

fedsim::StepsizeSchedule build_stepsize(const StepsizeSpec& spec,
                                        const fedsim::ObjectiveConstants& k, std::size_t rounds);

fedsim::SyncSchedule build_sync(const SyncSpec& spec, const fedsim::StepsizeSchedule& eta,
                                double smoothness, std::size_t rounds);

/// Everything run_experiment needs for one (scheme, seed) pair.
fedsim::ExperimentConfig build_experiment(const ExperimentSpec& spec, fedsim::Scheme scheme,
                                          std::uint64_t seed,
                                          std::shared_ptr<const fedsim::Objective> objective,
                                          const fedsim::Transport& transport);

/// Field reader carrying the JSON path for diagnostics.
class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const json& value() const { return *j_; }
  const std::string& path() const { return path_; }
  bool has(const std::string& key) const;
  Node at(const std::string& key) const;  // throws "missing"
  std::string child_path(const std::string& key) const;

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::uint64_t uint(const std::string& key) const;
  std::uint64_t uint(const std::string& key, std::uint64_t fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;

  /// Rejects keys outside `allowed` (keys starting with '_' are comments).
  void only(std::initializer_list<const char*> allowed) const;

 private:
  const json* j_;
  std::string path_;
};

}  // namespace airfed::config
