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

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "airfed/cli.hpp"
#include "airfed/csv.hpp"
#include "airfed/error.hpp"

namespace airfed::cli {

namespace {

struct Invocation {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  bool quiet = false;
};

void add_common(CLI::App& sub, Invocation& inv) {
  sub.add_option("--config", inv.config_path, "JSON configuration file")->required();
  sub.add_option("--out", inv.out_dir, "output directory (created if missing)");
  sub.add_option("--seed", inv.seed, "replace the configured seeds by this one");
  sub.add_option("--jobs", inv.jobs, "parallel runs (0: one per hardware thread)");
  sub.add_flag("--quiet", inv.quiet, "suppress progress output");
}

int execute(const std::string& command, const Invocation& inv) {
  config::Document doc = config::load(inv.config_path);
  if (inv.seed) config::override_seed(doc.raw, *inv.seed);
  const Options opt{inv.jobs, inv.quiet};

  Artifacts out;
  if (command == "postcode") {
    out = cmd_postcode(doc, opt);
  } else if (command == "pipeline") {
    out = cmd_pipeline(doc, opt);
  } else if (command == "simulate") {
    out = cmd_simulate(doc, opt);
  } else {
    out = cmd_verify(doc, opt);
  }

  std::filesystem::create_directories(inv.out_dir);
  for (const auto& [name, content] : out.files) {
    harness::write_file_atomic((std::filesystem::path(inv.out_dir) / name).string(), content);
  }
  if (!inv.quiet) {
    for (const auto& m : out.messages) std::cout << m << '\n';
  }
  return out.exit_code;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Over-the-air federated SGD simulator"};
  app.require_subcommand(1);
  Invocation inv;
  const char* commands[][2] = {
      {"postcode", "solve and certify the post-coding matrix"},
      {"pipeline", "Monte Carlo diagnostics of the transmission pipeline"},
      {"simulate", "run the configured schemes and seeds"},
      {"verify", "run the configured verification suites"},
  };
  for (const auto& c : commands) add_common(*app.add_subcommand(c[0], c[1]), inv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    return execute(command, inv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const ScheduleViolation& e) {
    std::cerr << "schedule violation: " << e.what() << '\n';
    return kScheduleViolation;
  } catch (const ExponentOverflow& e) {
    std::cerr << "exponent overflow: " << e.what() << '\n';
    return kPropertyViolation;
  } catch (const InvalidGrid& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPropertyViolation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPropertyViolation;
  }
}

}  // namespace airfed::cli
