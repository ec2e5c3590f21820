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

// Monte Carlo engine: BER-vs-SNR sweeps and the sum-rate-vs-users experiment.

#include "vlcnoma/analysis.hpp"
#include "vlcnoma/device.hpp"
#include "vlcnoma/geometry.hpp"
#include "vlcnoma/noma.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vlcnoma {

enum class Variant { Proposed, Grpa, ZeroForcing, LinearIdeal };

std::string to_string(Variant v);
Variant parse_variant(std::string_view tag);  // throws std::invalid_argument

struct SimConfig {
    RoomGeometry room;
    std::vector<UserGeometry> users;

    int num_users = 2;
    int modulation_order = 4;
    std::vector<double> qos_rates{1.8, 0.3, 0.1};
    std::vector<double> sum_rate_qos_rates{0.7, 0.6, 0.4, 0.4};

    std::vector<double> snr_db;
    std::vector<double> sigma_gamma2;

    double eta = 0.00022;
    double beta = 1.0;
    int n_cheb = 5;
    double lambda1 = 1.0;
    std::uint64_t symbols_per_point = 100000;
    std::uint64_t shards = 20;
    std::uint64_t seed = 1;
    std::vector<Variant> variants{Variant::Proposed, Variant::LinearIdeal};

    LedModel led;
    double drive_peak = 0.6;         // largest LED drive after biasing
    double bias_headroom = 0.5;      // extra DC bias as a fraction of the minimal bias
    double training_fraction = 0.2;
    std::uint64_t training_epochs = 10;  // passes over the training portion
    double sum_rate_snr_db = 20.0;

    std::vector<double> theorem1_kappas{0.5, 1.0, 2.0};
    std::uint64_t theorem1_samples = 100000;

    std::uint64_t threads = 0;  // 0 picks the hardware concurrency

    bool operator==(const SimConfig&) const;
};

// Table I geometry and the documented defaults.
SimConfig default_config();

// Throws std::invalid_argument for schema-level problems and GeometryError
// for physically invalid geometry.
void validate(const SimConfig& config);

struct UserPointResult {
    int user_id = 0;
    double qos_rate = 0.0;
    double power = 0.0;
    std::uint64_t bit_errors = 0;
    std::uint64_t bits = 0;
    double ber = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double analytic = 0.0;
    double sinr = 0.0;
    double rate = 0.0;
    double sigma_o2 = 0.0;  // includes the estimation-error term
};

struct PointResult {
    double snr_db = 0.0;
    double sigma_gamma2 = 0.0;
    Variant variant = Variant::Proposed;
    bool ok = false;
    std::string notice;
    std::vector<UserPointResult> users;  // ordered by user id
};

struct WilsonInterval {
    double lo = 0.0;
    double hi = 0.0;
};

WilsonInterval wilson_interval(std::uint64_t errors, std::uint64_t trials, double z = 1.959963984540054);

// One operating point. Identical arguments give bit-identical results.
PointResult run_point(const SimConfig& config, double snr_db, double sigma_gamma2, Variant variant,
                      std::uint64_t seed);

struct BerSweep {
    std::vector<PointResult> points;  // variant-major, then sigma_gamma2, then SNR
};

BerSweep sweep(const SimConfig& config);

struct RateRow {
    int users = 0;
    Variant variant = Variant::Proposed;
    double sum_rate = 0.0;
    bool feasible = true;
    std::vector<Rejection> rejected;
};

struct RateCurve {
    std::vector<RateRow> rows;
    std::optional<int> first_infeasible;  // smallest U the proposed scheme cannot serve
};

RateCurve sum_rate_experiment(const SimConfig& config);

// Trains the pre-distorter the way a sweep point does and returns it.
TrainResult train_reference(const SimConfig& config, double snr_db, double sigma_gamma2,
                            std::uint64_t seed);

// Physical channels of the first `count` configured users, scaled so user 1
// has unit mean squared gain.
std::vector<ChannelMatrix> scaled_channels(const SimConfig& config, int count);

struct Theorem1Row {
    int user_b = 0;
    int user_b_prime = 0;
    double kappa = 0.0;
    Theorem1Report report;
};

std::vector<Theorem1Row> theorem1_experiment(const SimConfig& config);

}  // namespace vlcnoma
