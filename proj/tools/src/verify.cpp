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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "airfed/cli.hpp"
#include "airfed/csv.hpp"
#include "airfed/error.hpp"
#include "commands_internal.hpp"

namespace airfed::cli {

namespace {

using harness::format_double;
using config::Node;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Check {
  std::string suite;
  std::string name;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
};

class Report {
 public:
  void add(const std::string& suite, const std::string& name, double value, double lo, double hi) {
    checks_.push_back({suite, name, value, lo, hi, value >= lo && value <= hi});
  }
  void flag(const std::string& suite, const std::string& name, bool ok) {
    add(suite, name, ok ? 1.0 : 0.0, 1.0, 1.0);
  }
  bool all_pass() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.pass; });
  }
  std::string csv() const {
    std::ostringstream os;
    os << "suite,check,value,lower,upper,pass\n";
    for (const auto& c : checks_) {
      os << c.suite << ',' << c.name << ',' << format_double(c.value) << ','
         << format_double(c.lower) << ',' << format_double(c.upper) << ',' << (c.pass ? 1 : 0)
         << '\n';
    }
    return os.str();
  }
  void messages(std::vector<std::string>& out) const {
    for (const auto& c : checks_) {
      out.push_back(std::string(c.pass ? "PASS " : "FAIL ") + c.suite + "." + c.name + " = " +
                    fmt("%.6g", c.value) + " in [" + fmt("%.6g", c.lower) + ", " +
                    fmt("%.6g", c.upper) + "]");
    }
  }

 private:
  std::vector<Check> checks_;
};

std::vector<double> number_list(const Node& n, const std::string& key,
                                const std::vector<double>& fallback) {
  if (!n.has(key)) return fallback;
  const Node l = n.at(key);
  if (!l.value().is_array() || l.value().empty()) {
    throw ConfigError(l.path(), "expected a non-empty array of numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < l.value().size(); ++i) {
    if (!l.value()[i].is_number()) {
      throw ConfigError(l.path() + "[" + std::to_string(i) + "]", "expected a number");
    }
    out.push_back(l.value()[i].get<double>());
  }
  return out;
}

Node section(const Node& verify, const std::string& name, const nlohmann::json& empty) {
  return verify.has(name) ? verify.at(name) : Node(empty, verify.child_path(name));
}

std::string label(int q, double ratio) { return "q" + std::to_string(q) + "_s" + fmt("%g", ratio); }

void suite_postcode(const config::Document& doc, const Node& v, Report& rep) {
  const nlohmann::json empty = nlohmann::json::object();
  const Node s = section(v, "postcode", empty);
  s.only({"mc_trials", "q", "sigma_over_delta", "seed"});
  const std::size_t trials = s.uint("mc_trials", 100000);
  const std::uint64_t seed = s.uint("seed", 0);
  std::vector<std::pair<int, double>> cases;
  if (s.has("q") || s.has("sigma_over_delta")) {
    for (const double q : number_list(s, "q", {8})) {
      for (const double r : number_list(s, "sigma_over_delta", {0.25})) {
        if (q < 4 || std::floor(q) != q) throw ConfigError(s.child_path("q"), "expected integers >= 4");
        cases.emplace_back(static_cast<int>(q), r);
      }
    }
  } else {
    const auto gc = config::parse_grid_channel(doc.raw);
    cases.emplace_back(gc.q, gc.sigma_c * (gc.q - 1) / 2.0);
  }
  for (const auto& [q, ratio] : cases) {
    config::GridChannelSpec spec{q, ratio * 2.0 / (q - 1)};
    const PostcodeAnalysis a = analyze_postcode(spec);
    const std::string l = label(q, ratio);
    rep.flag("postcode", l + ".feasible", a.hm.has_value());
    if (!a.hm) continue;
    rep.flag("postcode", l + ".certified", a.cert.ok);
    rep.add("postcode", l + ".max_interior_abs_bias", a.cert.max_interior_abs_bias, 0.0,
            postcode::kUnbiasTol);
    rep.add("postcode", l + ".variance_excess", a.cert.max_interior_variance - a.hm->v_star(),
            -kInf, postcode::kVarianceTol);
    const bool small_noise = spec.sigma_c <= a.grid.delta / 2.0;
    if (small_noise) {
      rep.add("postcode", l + ".v_star_minus_four_delta_sq", a.hm->v_star() - a.four_delta_sq,
              -kInf, 0.0);
    }
    const auto mc = harness::postcode_monte_carlo(
        *a.hm, a.cert, a.grid, channel::make_channel(spec.sigma_c), trials,
        RngStream(seed).child({static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(ratio * 1e6)}));
    rep.add("postcode", l + ".mc_max_abs_z", mc.max_abs_z, 0.0, harness::kMonteCarloZ);
    if (small_noise && a.lp_ran) {
      rep.flag("postcode", l + ".construction_feasible", a.construction.has_value());
      if (a.construction) {
        const auto& c = *a.construction;
        rep.add("postcode", l + ".zeta_inf_norm", c.zeta_inf_norm, 0.0, 0.5);
        rep.add("postcode", l + ".pstar_inverse_norm", c.pstar_inverse_norm, 0.0, 3.0);
        rep.add("postcode", l + ".construction_lp_violation", a.construction_lp_violation, 0.0,
                1e-9);
        rep.add("postcode", l + ".construction_v_star_minus_four_delta_sq",
                c.hm.v_star() - a.four_delta_sq, -kInf, 0.0);
        rep.add("postcode", l + ".lp_minus_construction_v_star", a.hm->v_star() - c.hm.v_star(),
                -kInf, 0.0);
      }
    }
  }
}

void suite_pipeline(const config::Document& doc, Report& rep, Artifacts& out) {
  const PipelineRun run = run_pipeline_diagnostics(doc);
  run.write(out);
  rep.add("pipeline", "max_abs_z", run.diag.max_abs_z, 0.0, harness::kMonteCarloZ);
  rep.add("pipeline", "mse_minus_bound", run.diag.mse - run.diag.bound, -kInf,
          harness::kMonteCarloZ * run.diag.mse_se);
}

void suite_codec(const config::Document& doc, const Node& v, Report& rep) {
  const nlohmann::json empty = nlohmann::json::object();
  const Node s = section(v, "codec", empty);
  s.only({"trials", "seed"});
  const auto gc = config::parse_grid_channel(doc.raw);
  const auto cs = config::parse_codec(doc.raw);
  const auto codec = codec::make_codec(cs.omega, channel::make_grid(gc.q).delta, cs.beta_max);
  const auto r = harness::codec_identities(codec, s.uint("trials", 1000000),
                                           RngStream(s.uint("seed", 0)).child(7));
  rep.add("codec", "max_roundtrip_ulps", static_cast<double>(r.max_ulps), 0.0, 2.0);
  rep.add("codec", "max_abs_psi", r.max_abs_psi, 0.0, 1.0 - codec.delta);
  rep.add("codec", "bracket_failures", static_cast<double>(r.bracket_failures), 0.0, 0.0);
}

void suite_ledger(const Experiment& e, const Node& v, Report& rep) {
  const nlohmann::json empty = nlohmann::json::object();
  const Node s = section(v, "ledger", empty);
  s.only({"rounds"});
  config::ExperimentSpec spec = e.spec;
  spec.rounds = s.uint("rounds", std::min<std::size_t>(spec.rounds, 20));
  spec.schemes.assign(std::begin(fedsim::kAllSchemes), std::end(fedsim::kAllSchemes));
  const Experiment x = prepare_experiment(spec);
  for (const auto scheme : spec.schemes) {
    auto cfg = x.make(scheme, spec.seeds.front());
    cfg.validate = false;
    const auto res = fedsim::run_experiment(cfg);
    const auto measured = harness::totals(res.ledger, spec.budget);
    const auto predicted = harness::scheme_ledger(
        scheme, cfg.objective->dim(), cfg.objective->workers(), cfg.rounds, cfg.sync, spec.budget,
        codec::bits_per_exponent(cfg.transport.codec));
    std::uint64_t phys = 0, bits = 0;
    for (const auto& r : res.ledger.records()) {
      phys += r.phys_scalars;
      bits += r.coded_bits;
    }
    const std::string n = lower_name(scheme);
    rep.flag("ledger", n + ".matches_closed_form", measured == predicted);
    rep.flag("ledger", n + ".records_sum_to_totals",
             phys == res.ledger.phys_scalars() && bits == res.ledger.coded_bits());
  }
}

std::string curve_csv(const harness::Curve& c) {
  std::ostringstream os;
  os << "round,mean_sq_dist,se_sq_dist\n";
  for (std::size_t k = 0; k < c.mean.size(); ++k) {
    os << k << ',' << format_double(c.mean[k]) << ',' << format_double(c.se[k]) << '\n';
  }
  return os.str();
}

struct Frozen {
  nlohmann::json values = nlohmann::json::object();
  double tolerance = 0.1;
};

void check_frozen(const Frozen& f, const std::string& key, double value, Report& rep) {
  if (!f.values.contains(key)) return;
  const double frozen = f.values[key].get<double>();
  rep.add("frozen", key, std::abs(value / frozen - 1.0), 0.0, f.tolerance);
}

void convex_rate_checks(const harness::ConvexRateReport& t, const Node& s, Report& rep,
                     Artifacts& out, nlohmann::json& constants, const Frozen& frozen) {
  const auto slope = number_list(s, "slope", {-1.3, -0.7});
  rep.add("convex_rate", "tail_slope", t.tail_slope, slope.front(), slope.back());
  rep.flag("convex_rate", "sync_invariant", t.sync_invariant_held);
  out.files["convex_rate_curve.csv"] = curve_csv(t.sq_dist);
  constants["convex_rate.implied_constant"] = t.implied_constant;
  check_frozen(frozen, "convex_rate.implied_constant", t.implied_constant, rep);
}

struct SpecCache {
  const config::ExperimentSpec& base;
  std::map<std::tuple<std::size_t, bool, std::size_t>, Experiment> cache;

  const Experiment& get(std::size_t m, bool noise, std::size_t rounds) {
    const auto key = std::make_tuple(m, noise, rounds);
    auto it = cache.find(key);
    if (it == cache.end()) {
      config::ExperimentSpec spec = base;
      spec.objective.m = m;
      spec.objective.logistic.m = m;
      if (!noise) spec.objective.noise = 0.0;
      spec.rounds = rounds;
      it = cache.emplace(key, prepare_experiment(spec)).first;
    }
    return it->second;
  }
};

}  // namespace

Artifacts cmd_verify(const config::Document& doc, const Options& opt) {
  Artifacts out;
  Report rep;
  const Node root(doc.raw, "");
  const Node v = root.at("verify");
  v.only({"suites", "postcode", "codec", "ledger", "convex_rate", "m_scaling", "nonconvex_rate", "schemes",
          "determinism", "frozen"});
  const Node suites_node = v.at("suites");
  if (!suites_node.value().is_array() || suites_node.value().empty()) {
    throw ConfigError(suites_node.path(), "expected a non-empty list of suite names");
  }
  std::vector<std::string> suites;
  static const char* known[] = {"postcode", "pipeline", "codec",   "ledger",     "convex_rate",
                                "m_scaling", "nonconvex_rate", "schemes", "determinism"};
  for (std::size_t i = 0; i < suites_node.value().size(); ++i) {
    const auto& x = suites_node.value()[i];
    const std::string path = suites_node.path() + "[" + std::to_string(i) + "]";
    if (!x.is_string()) throw ConfigError(path, "expected a suite name");
    const std::string name = x.get<std::string>();
    if (std::find(std::begin(known), std::end(known), name) == std::end(known)) {
      throw ConfigError(path, "unknown suite '" + name + "'");
    }
    suites.push_back(name);
  }
  const auto wants = [&](const char* n) {
    return std::find(suites.begin(), suites.end(), n) != suites.end();
  };

  Frozen frozen;
  if (v.has("frozen")) {
    const Node f = v.at("frozen");
    if (!f.value().is_object()) throw ConfigError(f.path(), "expected an object");
    for (const auto& [key, val] : f.value().items()) {
      if (key == "tolerance") continue;
      if (!val.is_number()) throw ConfigError(f.child_path(key), "expected a number");
      frozen.values[key] = val;
    }
    frozen.tolerance = f.number("tolerance", frozen.tolerance);
  }
  nlohmann::json constants = nlohmann::json::object();
  const nlohmann::json empty = nlohmann::json::object();

  // Parse everything a requested suite needs before running any of them.
  const bool needs_experiment = wants("ledger") || wants("convex_rate") || wants("m_scaling") ||
                                wants("nonconvex_rate") || wants("schemes") || wants("determinism");
  std::optional<Experiment> exp;
  if (needs_experiment) exp = prepare_experiment(config::parse_experiment(doc.raw));

  if (wants("postcode")) suite_postcode(doc, v, rep);
  if (wants("pipeline")) suite_pipeline(doc, rep, out);
  if (wants("codec")) suite_codec(doc, v, rep);
  if (wants("ledger")) suite_ledger(*exp, v, rep);

  if (wants("convex_rate") || wants("m_scaling")) {
    const auto& spec = exp->spec;
    const fedsim::Scheme scheme = spec.schemes.front();
    const Node t1 = section(v, "convex_rate", empty);
    t1.only({"slope"});
    SpecCache cache{spec, {}};
    if (wants("m_scaling")) {
      const Node ms = section(v, "m_scaling", empty);
      ms.only({"ratio"});
      const auto range = number_list(ms, "ratio", {1.5, 2.5});
      const auto r = harness::verify_m_scaling(
          [&](std::size_t m, bool noise, std::uint64_t seed) {
            return cache.get(m, noise, spec.rounds).make(scheme, seed);
          },
          spec.objective.m, spec.seeds, opt.jobs);
      rep.add("m_scaling", "attributable_ratio", r.ratio, range.front(), range.back());
      rep.flag("m_scaling", "sync_invariant",
               r.base.sync_invariant_held && r.doubled.sync_invariant_held);
      KeyValues kv;
      kv.add("m", static_cast<std::uint64_t>(r.m));
      kv.add("steady_base", r.base.steady_state);
      kv.add("steady_doubled", r.doubled.steady_state);
      kv.add("floor_base", r.floor_base);
      kv.add("floor_doubled", r.floor_doubled);
      kv.add("attributable_base", r.attributable_base);
      kv.add("attributable_doubled", r.attributable_doubled);
      kv.add("ratio", r.ratio);
      out.files["m_scaling.csv"] = kv.csv();
      if (wants("convex_rate")) convex_rate_checks(r.base, t1, rep, out, constants, frozen);
    } else {
      const auto r = harness::verify_convex_rate(
          [&](std::uint64_t seed) { return exp->make(scheme, seed); }, spec.seeds, opt.jobs);
      convex_rate_checks(r, t1, rep, out, constants, frozen);
    }
  }

  if (wants("nonconvex_rate")) {
    const auto& spec = exp->spec;
    const Node s = section(v, "nonconvex_rate", empty);
    s.only({"n0", "ratio"});
    const std::size_t n0 = s.uint("n0", spec.rounds);
    const auto range = number_list(s, "ratio", {0.25, 1.0});
    SpecCache cache{spec, {}};
    const fedsim::Scheme scheme = spec.schemes.front();
    const auto r = harness::verify_nonconvex_rate(
        [&](std::size_t n, std::uint64_t seed) {
          return cache.get(spec.objective.m, true, n).make(scheme, seed);
        },
        n0, spec.seeds, opt.jobs);
    rep.add("nonconvex_rate", "ratio", r.ratio, range.front(), range.back());
    rep.flag("nonconvex_rate", "sync_invariant", r.sync_invariant_held);
    KeyValues kv;
    kv.add("n0", static_cast<std::uint64_t>(r.n0));
    kv.add("metric_n0", r.metric_n0.mean);
    kv.add("metric_n0_se", r.metric_n0.se);
    kv.add("metric_4n0", r.metric_4n0.mean);
    kv.add("metric_4n0_se", r.metric_4n0.se);
    kv.add("ratio", r.ratio);
    out.files["nonconvex_rate.csv"] = kv.csv();
    constants["nonconvex_rate.implied_constant_n0"] = r.implied_constant_n0;
    constants["nonconvex_rate.implied_constant_4n0"] = r.implied_constant_4n0;
    check_frozen(frozen, "nonconvex_rate.implied_constant_n0", r.implied_constant_n0, rep);
    check_frozen(frozen, "nonconvex_rate.implied_constant_4n0", r.implied_constant_4n0, rep);
  }

  if (wants("schemes")) {
    const Node s = section(v, "schemes", empty);
    s.only({"accuracy_gap", "symbol_ratio", "noisy_worse_fraction"});
    config::ExperimentSpec spec = exp->spec;
    spec.schemes.assign(std::begin(fedsim::kAllSchemes), std::end(fedsim::kAllSchemes));
    const Experiment x = prepare_experiment(spec);
    const auto sim = simulate(x, nlohmann::json(), opt.jobs);
    const auto& rows = sim.comparison.rows;
    const auto find = [&](fedsim::Scheme sc) -> const harness::SchemeSummary& {
      return *std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.scheme == sc; });
    };
    const auto& coded = find(fedsim::Scheme::Coded);
    const auto& ours = find(fedsim::Scheme::Ours);
    const auto& noisy = find(fedsim::Scheme::Noisy);
    if (coded.final_accuracy && ours.final_accuracy) {
      rep.add("schemes", "accuracy_gap",
              std::abs(ours.final_accuracy->mean - coded.final_accuracy->mean), 0.0,
              s.number("accuracy_gap", 0.01));
    }
    rep.add("schemes", "symbol_ratio", ours.measured.total_symbols / coded.measured.total_symbols,
            0.0, s.number("symbol_ratio", 1.0 / 3.0));
    std::size_t worse = 0;
    for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
      if (noisy.final_losses[i] > ours.final_losses[i]) ++worse;
    }
    rep.add("schemes", "noisy_worse_fraction",
            static_cast<double>(worse) / static_cast<double>(spec.seeds.size()),
            s.number("noisy_worse_fraction", 0.9), 1.0);
    for (const auto& r : rows) rep.flag("schemes", lower_name(r.scheme) + ".ledger_matches", r.ledger_matches);
    out.files["schemes_comparison.csv"] = harness::comparison_csv(sim.comparison);
  }

  if (wants("determinism")) {
    const Node s = section(v, "determinism", empty);
    s.only({"rounds"});
    config::ExperimentSpec spec = exp->spec;
    spec.rounds = s.uint("rounds", std::min<std::size_t>(spec.rounds, 200));
    const Experiment x = prepare_experiment(spec);
    const auto a = simulate(x, nlohmann::json(), opt.jobs).artifacts.files;
    const auto b = simulate(x, nlohmann::json(), 1).artifacts.files;
    std::size_t diff = a.size() == b.size() ? 0 : 1;
    for (const auto& [name, content] : a) {
      const auto it = b.find(name);
      if (it == b.end() || it->second != content) ++diff;
    }
    rep.add("determinism", "differing_files", static_cast<double>(diff), 0.0, 0.0);
  }

  out.files["verify_report.csv"] = rep.csv();
  out.files["constants.json"] = constants.dump(2) + "\n";
  rep.messages(out.messages);
  out.exit_code = rep.all_pass() ? kOk : kPropertyViolation;
  return out;
}

}  // namespace airfed::cli
