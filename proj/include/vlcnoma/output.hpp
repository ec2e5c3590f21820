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

// CSV and SVG emitters. Floats are written with 10 significant digits.

#include "vlcnoma/analysis.hpp"
#include "vlcnoma/device.hpp"
#include "vlcnoma/geometry.hpp"
#include "vlcnoma/harness.hpp"
#include "vlcnoma/precoding.hpp"

#include <filesystem>
#include <ostream>
#include <string>

namespace vlcnoma {

std::string fmt(double v);

void write_channel_csv(std::ostream& out, const ChannelMatrix& h);
void write_precoder_csv(std::ostream& out, int user_id, const Precoder& p);
void write_coefficients_csv(std::ostream& out, const PredistorterState& state);
void write_mse_trace_csv(std::ostream& out, const MseTrace& trace);

inline constexpr const char* kBerHeader =
    "snr_db,variant,user,sigma_gamma2,ber,ber_ci_lo,ber_ci_hi,ber_analytic,sinr,rate";
inline constexpr const char* kRateHeader = "users,variant,sum_rate_bpcu,feasible";

void write_ber_csv(std::ostream& out, const BerSweep& sweep);
void write_rate_csv(std::ostream& out, const RateCurve& curve);
void write_theorem1_csv(std::ostream& out, const std::vector<Theorem1Row>& rows);

// Log-scale BER against SNR, one polyline per (variant, user, sigma_gamma2).
void write_ber_svg(std::ostream& out, const BerSweep& sweep, const std::string& title);
void write_rate_svg(std::ostream& out, const RateCurve& curve, const std::string& title);

// Writes `text` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace vlcnoma
