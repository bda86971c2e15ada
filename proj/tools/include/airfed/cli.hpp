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

#include <map>
#include <string>
#include <vector>

#include "airfed/config.hpp"

namespace airfed::cli {

/// Stable process exit codes.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kInfeasible = 2,
  kPropertyViolation = 3,
  kScheduleViolation = 4,
};

struct Options {
  unsigned jobs = 1;
  bool quiet = false;
};

/// What a command produced: files keyed by name relative to the output
/// directory, human-readable lines, and the exit code.
struct Artifacts {
  std::map<std::string, std::string> files;
  std::vector<std::string> messages;
  int exit_code = kOk;
};

Artifacts cmd_postcode(const config::Document& doc, const Options& opt);
Artifacts cmd_pipeline(const config::Document& doc, const Options& opt);
Artifacts cmd_simulate(const config::Document& doc, const Options& opt);
Artifacts cmd_verify(const config::Document& doc, const Options& opt);

/// Parses argv, runs the subcommand, writes its files atomically under
/// --out and returns the exit code; errors are mapped to exit codes here.
int run(int argc, char** argv);

}  // namespace airfed::cli
