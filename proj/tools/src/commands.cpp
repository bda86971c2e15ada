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
#include <cstdio>
#include <sstream>

#include "airfed/channel.hpp"
#include "airfed/cli.hpp"
#include "airfed/codec.hpp"
#include "airfed/csv.hpp"
#include "airfed/diagnostics.hpp"
#include "airfed/error.hpp"
#include "airfed/harness.hpp"
#include "airfed/postcode.hpp"
#include "airfed/simplex.hpp"
#include "commands_internal.hpp"

namespace airfed::cli {

using harness::format_double;

std::string KeyValues::csv() const {
  std::ostringstream os;
  os << "key,value\n";
  for (const auto& [k, v] : rows) os << k << ',' << v << '\n';
  return os.str();
}

void KeyValues::add(const std::string& key, double v) { rows.emplace_back(key, format_double(v)); }
void KeyValues::add(const std::string& key, std::uint64_t v) { rows.emplace_back(key, std::to_string(v)); }
void KeyValues::add(const std::string& key, bool v) { rows.emplace_back(key, v ? "1" : "0"); }
void KeyValues::add(const std::string& key, const std::string& v) { rows.emplace_back(key, v); }

std::string matrix_csv(const Matrix& h) {
  std::ostringstream os;
  os << "row";
  for (std::size_t k = 0; k < h.cols(); ++k) os << ",h" << k;
  os << '\n';
  for (std::size_t i = 0; i < h.rows(); ++i) {
    os << i;
    for (std::size_t k = 0; k < h.cols(); ++k) os << ',' << format_double(h(i, k));
    os << '\n';
  }
  return os.str();
}

std::string certificate_csv(const postcode::CertificationReport& rep) {
  std::ostringstream os;
  os << "level,interior,mean,variance,bias,unbiased_ok,variance_ok\n";
  for (const auto& l : rep.levels) {
    os << l.level << ',' << (l.interior ? 1 : 0) << ',' << format_double(l.mean) << ','
       << format_double(l.variance) << ',' << format_double(l.bias) << ','
       << (l.unbiased_ok ? 1 : 0) << ',' << (l.variance_ok ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

PostcodeAnalysis analyze_postcode(const config::GridChannelSpec& spec) {
  PostcodeAnalysis a;
  a.grid = channel::make_grid(spec.q);
  a.sigma_c = spec.sigma_c;
  const double delta = a.grid.delta;
  if (spec.sigma_c == 0.0) {
    auto pc = postcode::make_postcode(a.grid, 0.0);
    a.p = pc->p;
    a.hm = pc->hm;
    a.path = pc->path;
  } else {
    a.p = channel::transition_matrix(a.grid, spec.sigma_c);
    const auto lp = postcode::build_lp(a.p, a.grid);
    a.hm = postcode::solve_lp(lp, &a.lp);
    a.lp_ran = true;
    a.path = postcode::PostcodePath::Lp;
    a.construction = postcode::feasible_construction(a.p, a.grid);
    if (a.construction) {
      std::vector<double> x(lp.num_vars, 0.0);
      const auto& h = a.construction->hm.h();
      for (int i = 0; i < spec.q; ++i) {
        for (int k = 0; k < spec.q; ++k) {
          x[lp.h_index(i, k)] = h(static_cast<std::size_t>(i), static_cast<std::size_t>(k));
        }
      }
      x[lp.v_index()] = a.construction->hm.v_star();
      a.construction_lp_violation = postcode::max_violation(lp, x);
    }
  }
  if (a.hm) a.cert = postcode::certify(*a.hm, a.p, a.grid);
  a.four_delta_sq = 4.0 * delta * delta;
  return a;
}

void PostcodeAnalysis::summarize(KeyValues& kv) const {
  kv.add("q", static_cast<std::uint64_t>(grid.q));
  kv.add("delta", grid.delta);
  kv.add("sigma_c", sigma_c);
  kv.add("sigma_over_delta", sigma_c / grid.delta);
  kv.add("path", postcode::to_string(path));
  if (lp_ran) {
    const char* st = lp.status == postcode::LpStatus::Optimal      ? "optimal"
                     : lp.status == postcode::LpStatus::Infeasible ? "infeasible"
                     : lp.status == postcode::LpStatus::Unbounded  ? "unbounded"
                                                                   : "iteration_limit";
    kv.add("lp_status", std::string(st));
    kv.add("lp_iterations", static_cast<std::uint64_t>(lp.iterations));
    kv.add("lp_dropped_rows", static_cast<std::uint64_t>(lp.dropped_rows));
    kv.add("lp_min_reduced_cost", lp.min_reduced_cost);
    kv.add("lp_primal_residual", lp.primal_residual);
    kv.add("lp_certified", lp.certified);
  }
  kv.add("feasible", hm.has_value());
  if (hm) {
    kv.add("v_star", hm->v_star());
    kv.add("four_delta_sq", four_delta_sq);
    kv.add("v_star_le_four_delta_sq", hm->v_star() <= four_delta_sq);
    kv.add("max_interior_abs_bias", cert.max_interior_abs_bias);
    kv.add("max_interior_variance", cert.max_interior_variance);
    kv.add("certified", cert.ok);
  }
  if (lp_ran) {
    kv.add("construction_feasible", construction.has_value());
    if (construction) {
      kv.add("construction_zeta_inf_norm", construction->zeta_inf_norm);
      kv.add("construction_pstar_inverse_norm", construction->pstar_inverse_norm);
      kv.add("construction_v_star", construction->hm.v_star());
      kv.add("construction_lp_violation", construction_lp_violation);
      if (hm) kv.add("lp_le_construction", hm->v_star() <= construction->hm.v_star());
    }
  }
}

Artifacts cmd_postcode(const config::Document& doc, const Options&) {
  const auto spec = config::parse_grid_channel(doc.raw);
  const PostcodeAnalysis a = analyze_postcode(spec);
  Artifacts out;
  KeyValues kv;
  a.summarize(kv);
  out.files["postcode_summary.csv"] = kv.csv();
  if (!a.hm) {
    out.messages.push_back("postcode: q=" + std::to_string(spec.q) + " sigma_c=" +
                           fmt("%.6g", spec.sigma_c) + ": infeasible");
    out.exit_code = kInfeasible;
    return out;
  }
  out.files["postcode_H.csv"] = matrix_csv(a.hm->h());
  out.files["postcode_certificate.csv"] = certificate_csv(a.cert);
  if (a.construction) out.files["construction_H.csv"] = matrix_csv(a.construction->hm.h());
  out.messages.push_back("postcode: q=" + std::to_string(spec.q) + " sigma_c=" +
                         fmt("%.6g", spec.sigma_c) + " path=" + postcode::to_string(a.path) +
                         " v*=" + fmt("%.6g", a.hm->v_star()) + " (4 delta^2=" +
                         fmt("%.6g", a.four_delta_sq) + ")" +
                         (a.cert.ok ? " certified" : " NOT certified"));
  out.exit_code = a.cert.ok ? kOk : kPropertyViolation;
  return out;
}

std::vector<double> probe_vector(const config::ProbeSpec& p) {
  if (p.kind == "values") return p.values;
  std::vector<double> u(p.d, 0.0);
  if (p.kind == "uniform") {
    RngStream r = RngStream(p.seed).child(1);
    for (auto& x : u) x = p.low + (p.high - p.low) * r.uniform();
  }
  return u;
}

postcode::PostcodeMatrix misnormalize(const postcode::PostcodeMatrix& hm) {
  Matrix h = hm.h();
  for (std::size_t i = 1; i + 1 < h.rows(); ++i) {
    for (std::size_t k = 0; k < h.cols(); ++k) h(i, k) *= 0.8;
  }
  return postcode::PostcodeMatrix::unchecked(std::move(h), hm.v_star());
}

PipelineRun run_pipeline_diagnostics(const config::Document& doc) {
  const auto gc = config::parse_grid_channel(doc.raw);
  const auto cs = config::parse_codec(doc.raw);
  const auto probe = config::parse_probe(doc.raw);
  const auto control = config::parse_negative_control(doc.raw);
  PipelineRun run;
  run.grid = channel::make_grid(gc.q);
  run.channel = channel::make_channel(gc.sigma_c);
  run.codec = codec::make_codec(cs.omega, run.grid.delta, cs.beta_max);
  auto pc = postcode::make_postcode(run.grid, gc.sigma_c);
  if (!pc) {
    throw Infeasible("no post-coding matrix for q=" + std::to_string(gc.q) +
                     ", sigma_c=" + fmt("%.6g", gc.sigma_c));
  }
  run.hm = control == config::NegativeControl::MisnormalizedRows ? misnormalize(pc->hm) : pc->hm;
  run.negative_control = control != config::NegativeControl::None;
  const auto u = probe_vector(probe);
  run.diag = harness::pipeline_diagnostics(u, run.codec, run.grid, run.channel, run.hm,
                                           probe.trials, RngStream(probe.seed).child(2));
  return run;
}

void PipelineRun::write(Artifacts& out) const {
  std::ostringstream os;
  os << "coordinate,u,beta,mean,se,z\n";
  for (std::size_t i = 0; i < diag.u.size(); ++i) {
    os << i << ',' << format_double(diag.u[i]) << ',' << diag.beta[i] << ','
       << format_double(diag.mean[i]) << ',' << format_double(diag.se[i]) << ','
       << format_double(diag.z[i]) << '\n';
  }
  out.files["pipeline_coordinates.csv"] = os.str();
  KeyValues kv;
  kv.add("q", static_cast<std::uint64_t>(grid.q));
  kv.add("sigma_c", channel.sigma_c);
  kv.add("omega", codec.omega);
  kv.add("d", static_cast<std::uint64_t>(diag.u.size()));
  kv.add("trials", static_cast<std::uint64_t>(diag.trials));
  kv.add("negative_control", negative_control);
  kv.add("v_star", hm.v_star());
  kv.add("max_abs_z", diag.max_abs_z);
  kv.add("mse", diag.mse);
  kv.add("mse_se", diag.mse_se);
  kv.add("bound", diag.bound);
  kv.add("unbiased_ok", diag.unbiased_ok);
  kv.add("variance_ok", diag.variance_ok);
  out.files["pipeline_summary.csv"] = kv.csv();
}

Artifacts cmd_pipeline(const config::Document& doc, const Options&) {
  const PipelineRun run = run_pipeline_diagnostics(doc);
  Artifacts out;
  run.write(out);
  const bool ok = run.diag.unbiased_ok && run.diag.variance_ok;
  out.messages.push_back("pipeline: " + std::to_string(run.diag.trials) + " trials, max|z|=" +
                         fmt("%.3f", run.diag.max_abs_z) + ", mse=" + fmt("%.6g", run.diag.mse) +
                         " (bound " + fmt("%.6g", run.diag.bound) + ")" +
                         (ok ? "" : " VIOLATION"));
  out.exit_code = ok ? kOk : kPropertyViolation;
  return out;
}

std::string lower_name(fedsim::Scheme s) {
  std::string n = fedsim::to_string(s);
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return n;
}

namespace {

const char* scheme_definition(fedsim::Scheme s) {
  switch (s) {
    case fedsim::Scheme::Coded:
      return "every scalar as b bits on the coded channel";
    case fedsim::Scheme::Noisy:
      return "raw value through DAC and AWGN; no scaling, post-coding, exponents or sync";
    case fedsim::Scheme::Postcode:
      return "scaled value over the analog path with post-coding; exponents coded; no sync";
    case fedsim::Scheme::Sync:
      return "Noisy plus periodic exact parameter broadcast on the coded channel";
    case fedsim::Scheme::Ours:
      return "scaled value over the analog path with post-coding; exponents coded; periodic sync";
  }
  return "";
}

}  // namespace

Experiment prepare_experiment(const config::ExperimentSpec& spec) {
  Experiment e;
  e.spec = spec;
  e.objective = config::build_objective(spec.objective);
  e.transport = config::build_transport(spec);
  return e;
}

fedsim::ExperimentConfig Experiment::make(fedsim::Scheme s, std::uint64_t seed) const {
  return config::build_experiment(spec, s, seed, objective, transport);
}

SimulateResult simulate(const Experiment& e, const nlohmann::json& metadata, unsigned jobs) {
  SimulateResult res;
  const auto& spec = e.spec;
  // Validate once up front so a bad schedule fails before any work is done.
  for (const auto s : spec.schemes) {
    auto cfg = e.make(s, spec.seeds.front());
    const auto k = cfg.objective->constants();
    const auto st = fedsim::validate_stepsizes(cfg.stepsize, k.mu, k.smoothness, k.ell_sq, cfg.c0,
                                               cfg.rounds, k.mu > 0.0);
    if (!st.ok) throw ScheduleViolation("stepsize schedule: " + st.summary());
    if (fedsim::traits(s).sync) {
      const auto sy = fedsim::validate_sync(cfg.sync, cfg.stepsize, k.smoothness, cfg.rounds,
                                            cfg.sync_slack);
      if (!sy.ok) throw ScheduleViolation("sync schedule: " + sy.summary());
    }
  }
  res.comparison = harness::compare_schemes(
      [&](fedsim::Scheme s, std::uint64_t seed) { return e.make(s, seed); }, spec.schemes,
      spec.seeds, jobs);

  auto& files = res.artifacts.files;
  for (std::size_t si = 0; si < spec.schemes.size(); ++si) {
    const auto& runs = res.comparison.runs[si];
    std::ostringstream m;
    m << harness::kMetricsHeader << '\n';
    for (const auto& r : runs) harness::write_metrics_csv(m, harness::metrics_rows(r), false);
    const std::string name = lower_name(spec.schemes[si]);
    files["metrics_" + name + ".csv"] = m.str();
    std::ostringstream l;
    harness::write_ledger_csv(l, harness::ledger_rows(runs.front().ledger, spec.budget));
    files["ledger_" + name + ".csv"] = l.str();
  }
  files["comparison.csv"] = harness::comparison_csv(res.comparison);

  nlohmann::json meta;
  const auto cfg0 = e.make(spec.schemes.front(), spec.seeds.front());
  const auto k = e.objective->constants();
  meta["rounds"] = spec.rounds;
  meta["seeds"] = spec.seeds;
  meta["grid"] = {{"q", e.transport.grid.q}, {"delta", e.transport.grid.delta}};
  meta["sigma_c"] = e.transport.channel.sigma_c;
  meta["omega"] = e.transport.codec.omega;
  meta["bits_per_exponent"] = codec::bits_per_exponent(e.transport.codec);
  meta["coded_symbols_per_scalar"] = harness::coded_symbols_per_scalar(spec.budget);
  meta["budget"] = {{"b", spec.budget.b},
                    {"ell", spec.budget.ell},
                    {"alpha", spec.budget.alpha},
                    {"iq_halving", spec.budget.iq_halving}};
  if (e.transport.postcode) {
    meta["postcode"] = {{"path", postcode::to_string(e.transport.postcode->path)},
                        {"v_star", e.transport.postcode->hm.v_star()}};
  }
  meta["objective"] = {{"kind", e.objective->kind()},
                       {"d", e.objective->dim()},
                       {"m", e.objective->workers()},
                       {"mu", k.mu},
                       {"smoothness", k.smoothness},
                       {"ell_sq", k.ell_sq},
                       {"lambda", k.lambda},
                       {"sigma_star_sq_mean", k.sigma_star_sq_mean()}};
  meta["stepsize"] = {{"kind", fedsim::to_string(cfg0.stepsize.kind)},
                      {"eta", cfg0.stepsize.eta},
                      {"c", cfg0.stepsize.c},
                      {"k0", cfg0.stepsize.k0},
                      {"eta_1", cfg0.stepsize(1)},
                      {"eta_n", cfg0.stepsize(spec.rounds)}};
  meta["sync"] = {{"kind", fedsim::to_string(cfg0.sync.kind)},
                  {"rho", cfg0.sync.rho},
                  {"interval", cfg0.sync.interval},
                  {"count", cfg0.sync.times(spec.rounds).size()}};
  nlohmann::json schemes = nlohmann::json::object();
  for (const auto s : spec.schemes) {
    const auto t = fedsim::traits(s);
    schemes[fedsim::to_string(s)] = {{"physical", t.physical},
                                     {"codec", t.codec},
                                     {"postcode", t.postcode},
                                     {"sync", t.sync},
                                     {"definition", scheme_definition(s)}};
  }
  meta["schemes"] = schemes;
  if (!metadata.is_null()) meta["metadata"] = metadata;
  files["metadata.json"] = meta.dump(2) + "\n";

  for (const auto& row : res.comparison.rows) {
    std::string line = fedsim::to_string(row.scheme) + ": final loss " +
                       fmt("%.6g", row.final_loss.mean) + " +- " + fmt("%.2g", row.final_loss.se);
    if (row.final_accuracy) line += ", accuracy " + fmt("%.4f", row.final_accuracy->mean);
    line += ", symbols " + fmt("%.6g", row.measured.total_symbols);
    if (!row.ledger_matches) line += " (ledger MISMATCH)";
    res.artifacts.messages.push_back(line);
  }
  return res;
}

Artifacts cmd_simulate(const config::Document& doc, const Options& opt) {
  const auto spec = config::parse_experiment(doc.raw);
  const Experiment e = prepare_experiment(spec);
  const nlohmann::json meta = doc.raw.contains("metadata") ? doc.raw["metadata"] : nlohmann::json();
  SimulateResult res = simulate(e, meta, opt.jobs);
  const bool ledgers_ok = std::all_of(res.comparison.rows.begin(), res.comparison.rows.end(),
                                      [](const auto& r) { return r.ledger_matches; });
  res.artifacts.exit_code = ledgers_ok ? kOk : kPropertyViolation;
  return std::move(res.artifacts);
}

}  // namespace airfed::cli
