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

#include <stdexcept>
#include <string>

namespace airfed {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quantization grid that cannot carry interior information (q < 4).
class InvalidGrid : public Error {
 public:
  using Error::Error;
};

/// Non-finite or out-of-domain numeric input.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A value whose scale exponent exceeds the codec's encodable range.
class ExponentOverflow : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration document. `path()` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Stepsize or synchronization schedule failing its validity conditions.
class ScheduleViolation : public Error {
 public:
  using Error::Error;
};

/// No post-coding matrix exists for the requested grid and noise level.
class Infeasible : public Error {
 public:
  using Error::Error;
};

}  // namespace airfed
