// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The vlcnoma Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// JSON configuration: strict loading with Table I defaults, and the inverse
// serialization.

#include "vlcnoma/harness.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace vlcnoma {

class ConfigParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ConfigSchemaError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Missing keys keep their defaults; unknown keys are rejected. Throws
// ConfigParseError, ConfigSchemaError or GeometryError.
SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::filesystem::path& path);

std::string serialize_config(const SimConfig& config);

// "33dB" -> 10^-3.3; plain numbers pass through as variances.
double parse_sigma_gamma2(const std::string& text);

}  // namespace vlcnoma
