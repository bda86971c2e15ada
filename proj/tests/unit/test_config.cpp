#include <gtest/gtest.h>

#include <string>

#include "airfed/config.hpp"
#include "airfed/error.hpp"

namespace airfed::config {
namespace {

json quadratic_doc() {
  return json::parse(R"({
    "grid": {"q": 8},
    "channel": {"sigma_c": 0.05},
    "codec": {"omega": 0.001},
    "objective": {"kind": "quadratic", "d": 4, "m": 3, "heterogeneity": 0.5, "seed": 3},
    "schedule": {"kind": "inverse_time", "c": 9, "k0": "auto", "rounds": 50},
    "sync": {"kind": "geometric", "rho": 1.1},
    "scheme": ["Ours", "Coded"],
    "seeds": {"base": 10, "count": 3},
    "theta0": 1.5
  })");
}

std::string error_path(const json& j) {
  try {
    parse_experiment(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

TEST(Config, ParsesAFullExperiment) {
  const auto spec = parse_experiment(quadratic_doc());
  EXPECT_EQ(spec.channel.q, 8);
  EXPECT_EQ(spec.channel.sigma_c, 0.05);
  EXPECT_EQ(spec.objective.d, 4u);
  EXPECT_EQ(spec.rounds, 50u);
  EXPECT_FALSE(spec.stepsize.k0.has_value());
  EXPECT_EQ(spec.schemes, (std::vector<fedsim::Scheme>{fedsim::Scheme::Ours, fedsim::Scheme::Coded}));
  EXPECT_EQ(spec.seeds, (std::vector<std::uint64_t>{10, 11, 12}));
  EXPECT_TRUE(spec.has_theta0_fill);

  const auto obj = build_objective(spec.objective);
  const auto eta = build_stepsize(spec.stepsize, obj->constants(), spec.rounds);
  const auto& k = obj->constants();
  EXPECT_LE(eta(1), spec.stepsize.c0 / (k.ell_sq + k.smoothness) * (1 + 1e-12));
  const auto transport = build_transport(spec);
  ASSERT_TRUE(transport.postcode);
  const auto cfg = build_experiment(spec, fedsim::Scheme::Ours, 11, obj, transport);
  EXPECT_EQ(cfg.seed, 11u);
  EXPECT_EQ(*cfg.theta0, fedsim::Vec(4, 1.5));
}

TEST(Config, RelativeNoiseLevel) {
  auto j = quadratic_doc();
  j["channel"] = {{"sigma_over_delta", 0.5}};
  EXPECT_DOUBLE_EQ(parse_experiment(j).channel.sigma_c, 0.5 * 2.0 / 7.0);
  j["channel"]["sigma_c"] = 0.1;
  EXPECT_EQ(error_path(j), "channel");
}

TEST(Config, ErrorsNameTheField) {
  auto j = quadratic_doc();
  j["channel"].erase("sigma_c");
  EXPECT_EQ(error_path(j), "channel.sigma_c");

  j = quadratic_doc();
  j["channel"]["sigma_c"] = -1.0;
  EXPECT_EQ(error_path(j), "channel.sigma_c");

  j = quadratic_doc();
  j["grid"]["q"] = 2;
  EXPECT_THROW(parse_experiment(j), Error);

  j = quadratic_doc();
  j["objective"]["colour"] = "red";
  EXPECT_EQ(error_path(j), "objective.colour");

  j = quadratic_doc();
  j["objective"]["kind"] = "cubic";
  EXPECT_EQ(error_path(j), "objective.kind");

  j = quadratic_doc();
  j["schedule"].erase("rounds");
  EXPECT_EQ(error_path(j), "schedule.rounds");

  j = quadratic_doc();
  j["schedule"]["c"] = "nine";
  EXPECT_EQ(error_path(j), "schedule.c");

  j = quadratic_doc();
  j["sync"]["rho"] = 1.0;
  EXPECT_EQ(error_path(j), "sync.rho");

  j = quadratic_doc();
  j["scheme"] = json::array({"Ours", "Fancy"});
  EXPECT_EQ(error_path(j), "scheme[1]");

  j = quadratic_doc();
  j["scheme"] = json::array({"Ours", "Ours"});
  EXPECT_EQ(error_path(j), "scheme[1]");

  j = quadratic_doc();
  j["seeds"] = json::array({1, -2});
  EXPECT_EQ(error_path(j), "seeds[1]");

  j = quadratic_doc();
  j["theta0"] = json::array({1, 2});
  EXPECT_EQ(error_path(j), "theta0");

  j = quadratic_doc();
  j["budget"] = {{"ell", 100}};
  EXPECT_EQ(error_path(j), "budget.ell");
}

TEST(Config, CommentKeysAndUnknownTopLevelFields) {
  auto j = quadratic_doc();
  j["objective"]["_note"] = "ignored";
  EXPECT_NO_THROW(parse_experiment(j));
  try {
    parse(R"({"grid": {"q": 8}, "extra": 1})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "extra");
  }
  EXPECT_THROW(parse("{not json"), ConfigError);
  EXPECT_THROW(parse("[1, 2]"), ConfigError);
}

TEST(Config, SeedForms) {
  auto j = quadratic_doc();
  j["seeds"] = 7;
  EXPECT_EQ(parse_experiment(j).seeds, (std::vector<std::uint64_t>{7}));
  j["seeds"] = json::array({4, 2});
  EXPECT_EQ(parse_experiment(j).seeds, (std::vector<std::uint64_t>{4, 2}));
  j.erase("seeds");
  EXPECT_EQ(parse_experiment(j).seeds, (std::vector<std::uint64_t>{0}));
  j["seeds"] = {{"base", 0}, {"count", 0}};
  EXPECT_EQ(error_path(j), "seeds.count");
}

TEST(Config, OverrideSeed) {
  auto j = quadratic_doc();
  override_seed(j, 99);
  EXPECT_EQ(parse_experiment(j).seeds, (std::vector<std::uint64_t>{99, 100, 101}));
  j["seeds"] = json::array({1, 2, 3});
  override_seed(j, 5);
  EXPECT_EQ(parse_experiment(j).seeds, (std::vector<std::uint64_t>{5}));
}

TEST(Config, InfeasibleTransport) {
  auto j = quadratic_doc();
  j["channel"] = {{"sigma_over_delta", 10.0}};
  const auto spec = parse_experiment(j);
  EXPECT_THROW(build_transport(spec), Infeasible);
  // Schemes without post-coding never need the matrix.
  j["scheme"] = json::array({"Coded", "Noisy", "Sync"});
  EXPECT_NO_THROW(build_transport(parse_experiment(j)));
}

TEST(Config, AutoSyncIntervalMeetsTheBudget) {
  auto j = quadratic_doc();
  j["schedule"] = {{"kind", "constant"}, {"eta", 0.01}, {"rounds", 100}};
  j["sync"] = {{"kind", "fixed"}, {"interval", "auto"}};
  const auto spec = parse_experiment(j);
  const auto obj = build_objective(spec.objective);
  const auto eta = build_stepsize(spec.stepsize, obj->constants(), spec.rounds);
  const auto sync = build_sync(spec.sync, eta, obj->constants().smoothness, spec.rounds);
  EXPECT_EQ(sync.interval, fedsim::auto_interval(0.01, obj->constants().smoothness, 1.0));
}

}  // namespace
}  // namespace airfed::config
