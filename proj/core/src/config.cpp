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

#include "airfed/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "airfed/channel.hpp"
#include "airfed/codec.hpp"
#include "airfed/error.hpp"
#include "airfed/postcode.hpp"
#include "airfed/rng.hpp"

namespace airfed::config {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_auto(const json& j) { return j.is_string() && lower(j.get<std::string>()) == "auto"; }

}  // namespace

bool Node::has(const std::string& key) const {
  return j_->is_object() && j_->contains(key) && !(*j_)[key].is_null();
}

std::string Node::child_path(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

Node Node::at(const std::string& key) const {
  if (!j_->is_object()) throw ConfigError(path_.empty() ? "<document>" : path_, "expected an object");
  if (!has(key)) throw ConfigError(child_path(key), "missing");
  return Node((*j_)[key], child_path(key));
}

double Node::number(const std::string& key) const {
  const Node n = at(key);
  if (!n.value().is_number()) throw ConfigError(n.path(), "expected a number");
  const double v = n.value().get<double>();
  if (!std::isfinite(v)) throw ConfigError(n.path(), "must be finite");
  return v;
}

double Node::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::uint64_t Node::uint(const std::string& key) const {
  const Node n = at(key);
  const json& v = n.value();
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x >= 0.0 && x < 1.8e19 && std::floor(x) == x) return static_cast<std::uint64_t>(x);
  }
  throw ConfigError(n.path(), "expected a non-negative integer");
}

std::uint64_t Node::uint(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? uint(key) : fallback;
}

bool Node::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const Node n = at(key);
  if (!n.value().is_boolean()) throw ConfigError(n.path(), "expected true or false");
  return n.value().get<bool>();
}

std::string Node::string(const std::string& key) const {
  const Node n = at(key);
  if (!n.value().is_string()) throw ConfigError(n.path(), "expected a string");
  return n.value().get<std::string>();
}

std::string Node::string(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

void Node::only(std::initializer_list<const char*> allowed) const {
  if (!j_->is_object()) throw ConfigError(path_.empty() ? "<document>" : path_, "expected an object");
  for (const auto& [key, _] : j_->items()) {
    if (!key.empty() && key.front() == '_') continue;
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known) throw ConfigError(child_path(key), "unknown field");
  }
}

Document parse(const std::string& text) {
  Document doc;
  try {
    doc.raw = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.raw.is_object()) throw ConfigError("<document>", "expected an object");
  Node(doc.raw, "").only({"grid", "channel", "codec", "objective", "schedule", "sync", "scheme",
                          "seeds", "budget", "theta0", "probe", "postcode", "verify", "metadata",
                          "description"});
  return doc;
}

Document load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("<document>", "cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  Document doc = parse(ss.str());
  doc.directory = std::filesystem::absolute(path).parent_path().string();
  return doc;
}

GridChannelSpec parse_grid_channel(const json& j) {
  const Node root(j, "");
  const Node grid = root.at("grid");
  grid.only({"q"});
  GridChannelSpec spec;
  const std::uint64_t q = grid.uint("q");
  if (q < 4 || q > (1u << 20)) throw ConfigError("grid.q", "must be in [4, 2^20]");
  spec.q = static_cast<int>(q);
  const double delta = 2.0 / (spec.q - 1);

  const Node ch = root.at("channel");
  ch.only({"sigma_c", "sigma_over_delta"});
  const bool abs = ch.has("sigma_c");
  const bool rel = ch.has("sigma_over_delta");
  if (abs && rel) throw ConfigError("channel", "give sigma_c or sigma_over_delta, not both");
  if (!abs && !rel) throw ConfigError("channel.sigma_c", "missing");
  spec.sigma_c = abs ? ch.number("sigma_c") : ch.number("sigma_over_delta") * delta;
  if (spec.sigma_c < 0.0) {
    throw ConfigError(abs ? "channel.sigma_c" : "channel.sigma_over_delta", "must be >= 0");
  }
  return spec;
}

CodecSpec parse_codec(const json& j) {
  const Node c = Node(j, "").at("codec");
  c.only({"omega", "beta_max"});
  CodecSpec spec;
  spec.omega = c.number("omega");
  if (!(spec.omega > 0.0)) throw ConfigError("codec.omega", "must be > 0");
  const std::uint64_t bm = c.uint("beta_max", 63);
  if (bm > 1023) throw ConfigError("codec.beta_max", "must be <= 1023");
  spec.beta_max = static_cast<int>(bm);
  return spec;
}

ProbeSpec parse_probe(const json& j) {
  const Node root(j, "");
  ProbeSpec spec;
  if (!root.has("probe")) return spec;
  const Node p = root.at("probe");
  p.only({"kind", "d", "low", "high", "values", "trials", "seed"});
  spec.kind = lower(p.string("kind", spec.kind));
  spec.trials = p.uint("trials", spec.trials);
  spec.seed = p.uint("seed", spec.seed);
  if (spec.trials < 2) throw ConfigError("probe.trials", "must be >= 2");
  if (spec.kind == "values") {
    const Node v = p.at("values");
    if (!v.value().is_array() || v.value().empty()) {
      throw ConfigError(v.path(), "expected a non-empty array of numbers");
    }
    for (std::size_t i = 0; i < v.value().size(); ++i) {
      const json& x = v.value()[i];
      if (!x.is_number()) throw ConfigError(v.path() + "[" + std::to_string(i) + "]", "expected a number");
      spec.values.push_back(x.get<double>());
    }
    spec.d = spec.values.size();
  } else if (spec.kind == "uniform" || spec.kind == "zero") {
    spec.d = p.uint("d", spec.d);
    if (spec.d == 0) throw ConfigError("probe.d", "must be >= 1");
    spec.low = p.number("low", spec.low);
    spec.high = p.number("high", spec.high);
    if (!(spec.low <= spec.high)) throw ConfigError("probe.high", "must be >= probe.low");
  } else {
    throw ConfigError("probe.kind", "expected uniform, zero or values");
  }
  return spec;
}

NegativeControl parse_negative_control(const json& j) {
  const Node root(j, "");
  if (!root.has("postcode")) return NegativeControl::None;
  const Node p = root.at("postcode");
  p.only({"negative_control"});
  const std::string nc = lower(p.string("negative_control", "none"));
  if (nc == "none") return NegativeControl::None;
  if (nc == "misnormalized_rows") return NegativeControl::MisnormalizedRows;
  throw ConfigError("postcode.negative_control", "expected none or misnormalized_rows");
}

namespace {

ObjectiveSpec parse_objective(const Node& o) {
  o.only({"kind", "d", "m", "heterogeneity", "noise", "a", "b", "seed", "feature_scale",
          "w_norm", "label_skew", "eval_samples", "test_samples"});
  ObjectiveSpec s;
  s.kind = lower(o.string("kind"));
  s.d = o.uint("d", s.d);
  s.m = o.uint("m", s.m);
  if (s.d == 0) throw ConfigError("objective.d", "must be >= 1");
  if (s.m == 0) throw ConfigError("objective.m", "must be >= 1");
  s.seed = o.uint("seed", s.seed);
  s.heterogeneity = o.number("heterogeneity", s.heterogeneity);
  s.noise = o.number("noise", s.noise);
  if (s.heterogeneity < 0.0) throw ConfigError("objective.heterogeneity", "must be >= 0");
  if (s.noise < 0.0) throw ConfigError("objective.noise", "must be >= 0");
  if (s.kind == "quadratic") {
    // nothing further
  } else if (s.kind == "nonconvex") {
    s.a = o.number("a", s.a);
    s.b = o.number("b", s.b);
  } else if (s.kind == "logistic") {
    auto& l = s.logistic;
    l.d = s.d;
    l.m = s.m;
    l.feature_scale = o.number("feature_scale", l.feature_scale);
    l.w_norm = o.number("w_norm", l.w_norm);
    l.label_skew = o.number("label_skew", l.label_skew);
    l.eval_samples = o.uint("eval_samples", l.eval_samples);
    l.test_samples = o.uint("test_samples", l.test_samples);
    if (!(l.feature_scale > 0.0)) throw ConfigError("objective.feature_scale", "must be > 0");
    if (l.w_norm < 0.0) throw ConfigError("objective.w_norm", "must be >= 0");
    if (l.label_skew < 0.0 || l.label_skew > 1.0) {
      throw ConfigError("objective.label_skew", "must be in [0, 1]");
    }
    if (l.eval_samples == 0) throw ConfigError("objective.eval_samples", "must be >= 1");
    if (l.test_samples == 0) throw ConfigError("objective.test_samples", "must be >= 1");
  } else {
    throw ConfigError("objective.kind", "expected quadratic, nonconvex or logistic");
  }
  return s;
}

StepsizeSpec parse_stepsize(const Node& s, std::size_t& rounds) {
  s.only({"kind", "eta", "c", "k0", "c0", "rounds"});
  StepsizeSpec spec;
  const std::string kind = lower(s.string("kind"));
  rounds = s.uint("rounds");
  if (rounds == 0) throw ConfigError("schedule.rounds", "must be >= 1");
  spec.c0 = s.number("c0", spec.c0);
  if (!(spec.c0 > 0.0)) throw ConfigError("schedule.c0", "must be > 0");
  if (kind == "constant" || kind == "linear") {
    spec.kind = kind == "constant" ? fedsim::StepsizeKind::Constant : fedsim::StepsizeKind::Linear;
    spec.eta = s.number("eta");
    if (!(spec.eta > 0.0)) throw ConfigError("schedule.eta", "must be > 0");
  } else if (kind == "inverse_time") {
    spec.kind = fedsim::StepsizeKind::InverseTime;
    spec.c = s.number("c");
    if (!(spec.c > 0.0)) throw ConfigError("schedule.c", "must be > 0");
    if (s.has("k0") && !is_auto(s.value()["k0"])) {
      spec.k0 = s.number("k0");
      if (*spec.k0 < 0.0) throw ConfigError("schedule.k0", "must be >= 0");
    }
  } else if (kind == "inverse_sqrt") {
    spec.kind = fedsim::StepsizeKind::InverseSqrtHorizon;
    spec.c = s.number("c");
    if (!(spec.c > 0.0)) throw ConfigError("schedule.c", "must be > 0");
  } else {
    throw ConfigError("schedule.kind", "expected constant, inverse_time, inverse_sqrt or linear");
  }
  return spec;
}

SyncSpec parse_sync(const Node& s) {
  s.only({"kind", "rho", "interval", "slack"});
  SyncSpec spec;
  const std::string kind = lower(s.string("kind"));
  spec.slack = s.number("slack", spec.slack);
  if (!(spec.slack > 0.0)) throw ConfigError("sync.slack", "must be > 0");
  if (kind == "geometric") {
    spec.kind = fedsim::SyncKind::Geometric;
    spec.rho = s.number("rho");
    if (!(spec.rho > 1.0)) throw ConfigError("sync.rho", "must be > 1");
  } else if (kind == "fixed") {
    spec.kind = fedsim::SyncKind::FixedInterval;
    if (s.has("interval") && !is_auto(s.value()["interval"])) {
      spec.interval = s.uint("interval");
      if (*spec.interval == 0) throw ConfigError("sync.interval", "must be >= 1");
    }
  } else if (kind == "none") {
    spec.kind = fedsim::SyncKind::None;
  } else {
    throw ConfigError("sync.kind", "expected geometric, fixed or none");
  }
  return spec;
}

std::vector<fedsim::Scheme> parse_schemes(const Node& root) {
  if (!root.has("scheme")) return {fedsim::Scheme::Ours};
  const Node s = root.at("scheme");
  std::vector<fedsim::Scheme> out;
  auto one = [&](const json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path, "expected a scheme name");
    const auto parsed = fedsim::parse_scheme(v.get<std::string>());
    if (!parsed) throw ConfigError(path, "unknown scheme '" + v.get<std::string>() + "'");
    if (std::find(out.begin(), out.end(), *parsed) != out.end()) {
      throw ConfigError(path, "duplicate scheme");
    }
    out.push_back(*parsed);
  };
  if (s.value().is_array()) {
    if (s.value().empty()) throw ConfigError(s.path(), "expected at least one scheme");
    for (std::size_t i = 0; i < s.value().size(); ++i) {
      one(s.value()[i], s.path() + "[" + std::to_string(i) + "]");
    }
  } else if (s.value().is_string() && lower(s.value().get<std::string>()) == "all") {
    out.assign(std::begin(fedsim::kAllSchemes), std::end(fedsim::kAllSchemes));
  } else {
    one(s.value(), s.path());
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const Node& root) {
  if (!root.has("seeds")) return {0};
  const Node s = root.at("seeds");
  std::vector<std::uint64_t> out;
  if (s.value().is_array()) {
    if (s.value().empty()) throw ConfigError(s.path(), "expected at least one seed");
    for (std::size_t i = 0; i < s.value().size(); ++i) {
      const json& v = s.value()[i];
      const std::string path = s.path() + "[" + std::to_string(i) + "]";
      if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw ConfigError(path, "expected a non-negative integer");
      }
      out.push_back(v.get<std::uint64_t>());
    }
    return out;
  }
  if (s.value().is_object()) {
    s.only({"base", "count"});
    const std::uint64_t base = s.uint("base", 0);
    const std::uint64_t count = s.uint("count");
    if (count == 0 || count > 100000) throw ConfigError("seeds.count", "must be in [1, 100000]");
    for (std::uint64_t i = 0; i < count; ++i) out.push_back(base + i);
    return out;
  }
  if (s.value().is_number_integer()) return {root.uint("seeds")};
  throw ConfigError("seeds", "expected a list, an integer or {base, count}");
}

harness::ChannelBudget parse_budget(const Node& root) {
  if (!root.has("budget")) return harness::ChannelBudget{};
  const Node b = root.at("budget");
  b.only({"b", "ell", "alpha", "iq_halving"});
  const std::uint64_t bits = b.uint("b", 32);
  const std::uint64_t ell = b.uint("ell", 1);
  if (bits > 1024) throw ConfigError("budget.b", "must be <= 1024");
  if (ell > 64) throw ConfigError("budget.ell", "must be <= 64");
  return harness::make_budget(static_cast<int>(bits), static_cast<int>(ell),
                              b.number("alpha", 0.0), b.boolean("iq_halving", false));
}

}  // namespace

ExperimentSpec parse_experiment(const json& j) {
  const Node root(j, "");
  ExperimentSpec spec;
  spec.channel = parse_grid_channel(j);
  spec.codec = parse_codec(j);
  spec.objective = parse_objective(root.at("objective"));
  spec.stepsize = parse_stepsize(root.at("schedule"), spec.rounds);
  spec.sync = root.has("sync") ? parse_sync(root.at("sync")) : SyncSpec{};
  spec.schemes = parse_schemes(root);
  spec.seeds = parse_seeds(root);
  spec.budget = parse_budget(root);
  if (root.has("theta0")) {
    const Node t = root.at("theta0");
    if (t.value().is_number()) {
      spec.theta0_fill = root.number("theta0");
      spec.has_theta0_fill = true;
    } else if (t.value().is_array()) {
      if (t.value().size() != spec.objective.d) {
        throw ConfigError("theta0", "expected " + std::to_string(spec.objective.d) + " entries");
      }
      fedsim::Vec v;
      for (std::size_t i = 0; i < t.value().size(); ++i) {
        const json& x = t.value()[i];
        if (!x.is_number()) throw ConfigError("theta0[" + std::to_string(i) + "]", "expected a number");
        v.push_back(x.get<double>());
      }
      spec.theta0 = std::move(v);
    } else {
      throw ConfigError("theta0", "expected a number or an array");
    }
  }
  return spec;
}

void override_seed(json& j, std::uint64_t seed) {
  if (j.contains("seeds") && j["seeds"].is_object()) {
    j["seeds"]["base"] = seed;
  } else {
    j["seeds"] = json::array({seed});
  }
}

std::shared_ptr<const fedsim::Objective> build_objective(const ObjectiveSpec& s) {
  const RngStream rng(s.seed);
  if (s.kind == "quadratic") {
    return fedsim::make_quadratic_objective(s.d, s.m, s.heterogeneity, s.noise, rng);
  }
  if (s.kind == "nonconvex") {
    return fedsim::make_nonconvex_objective(s.d, s.m, s.a, s.b, s.heterogeneity, s.noise, rng);
  }
  if (s.kind == "logistic") return fedsim::make_logistic_objective(s.logistic, rng);
  throw ConfigError("objective.kind", "expected quadratic, nonconvex or logistic");
}

fedsim::Transport build_transport(const ExperimentSpec& spec) {
  fedsim::Transport t;
  t.grid = channel::make_grid(spec.channel.q);
  t.channel = channel::make_channel(spec.channel.sigma_c);
  t.codec = codec::make_codec(spec.codec.omega, t.grid.delta, spec.codec.beta_max);
  t.budget = spec.budget;
  const bool needs_postcode = std::any_of(spec.schemes.begin(), spec.schemes.end(),
                                          [](fedsim::Scheme s) { return fedsim::traits(s).postcode; });
  if (needs_postcode) {
    auto pc = postcode::make_postcode(t.grid, spec.channel.sigma_c);
    if (!pc) {
      throw Infeasible("no post-coding matrix for q=" + std::to_string(spec.channel.q) +
                       ", sigma_c=" + std::to_string(spec.channel.sigma_c));
    }
    t.postcode = std::make_shared<const postcode::Postcode>(std::move(*pc));
  }
  return t;
}

fedsim::StepsizeSchedule build_stepsize(const StepsizeSpec& spec,
                                        const fedsim::ObjectiveConstants& k, std::size_t rounds) {
  using fedsim::StepsizeKind;
  switch (spec.kind) {
    case StepsizeKind::Constant:
      return fedsim::constant_stepsize(spec.eta);
    case StepsizeKind::Linear:
      return fedsim::linear_stepsize(spec.eta);
    case StepsizeKind::InverseTime: {
      if (!(k.mu > 0.0)) {
        throw ConfigError("schedule.kind", "inverse_time needs a strongly convex objective");
      }
      const double k0 =
          spec.k0 ? *spec.k0 : fedsim::auto_offset(spec.c, k.mu, k.ell_sq, k.smoothness, spec.c0);
      return fedsim::inverse_time_stepsize(spec.c, k.mu, k0);
    }
    case StepsizeKind::InverseSqrtHorizon:
      return fedsim::inverse_sqrt_stepsize(spec.c, rounds);
  }
  throw ConfigError("schedule.kind", "unsupported");
}

fedsim::SyncSchedule build_sync(const SyncSpec& spec, const fedsim::StepsizeSchedule& eta,
                                double smoothness, std::size_t rounds) {
  switch (spec.kind) {
    case fedsim::SyncKind::Geometric:
      return fedsim::geometric_sync(spec.rho);
    case fedsim::SyncKind::FixedInterval: {
      if (spec.interval) return fedsim::fixed_sync(*spec.interval);
      // The largest stepsize of the horizon bounds every gap.
      const double peak = std::max(eta(1), eta(std::max<std::size_t>(rounds, 1)));
      return fedsim::fixed_sync(fedsim::auto_interval(peak, smoothness, spec.slack));
    }
    case fedsim::SyncKind::None:
      return fedsim::no_sync();
  }
  return fedsim::no_sync();
}

fedsim::ExperimentConfig build_experiment(const ExperimentSpec& spec, fedsim::Scheme scheme,
                                          std::uint64_t seed,
                                          std::shared_ptr<const fedsim::Objective> objective,
                                          const fedsim::Transport& transport) {
  fedsim::ExperimentConfig cfg;
  const auto k = objective->constants();
  cfg.stepsize = build_stepsize(spec.stepsize, k, spec.rounds);
  cfg.sync = build_sync(spec.sync, cfg.stepsize, k.smoothness, spec.rounds);
  cfg.objective = std::move(objective);
  cfg.scheme = scheme;
  cfg.transport = transport;
  cfg.rounds = spec.rounds;
  cfg.seed = seed;
  if (spec.theta0) {
    cfg.theta0 = spec.theta0;
  } else if (spec.has_theta0_fill) {
    cfg.theta0 = fedsim::Vec(cfg.objective->dim(), spec.theta0_fill);
  }
  cfg.c0 = spec.stepsize.c0;
  cfg.sync_slack = spec.sync.slack;
  return cfg;
}

}  // namespace airfed::config
