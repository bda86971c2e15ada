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

#include <optional>
#include <string>

namespace airfed::fedsim {

enum class Scheme { Coded, Noisy, Postcode, Sync, Ours };

/// Which parts of the transmission stack a scheme uses.
struct SchemeTraits {
  bool physical = false;  // gradients travel over the analog path
  bool codec = false;     // scale-adaptive split with exponents on the coded path
  bool postcode = false;  // receiver-side H
  bool sync = false;      // periodic exact parameter broadcast
};

SchemeTraits traits(Scheme s);
std::string to_string(Scheme s);
std::optional<Scheme> parse_scheme(const std::string& name);

inline constexpr Scheme kAllSchemes[] = {Scheme::Coded, Scheme::Noisy, Scheme::Postcode,
                                         Scheme::Sync, Scheme::Ours};

}  // namespace airfed::fedsim
