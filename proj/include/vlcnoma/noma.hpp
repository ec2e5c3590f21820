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

// Power-domain NOMA building blocks: square M-QAM, superposition coding,
// effective-noise accounting, QoS power allocation and SIC detection.

#include "vlcnoma/linalg.hpp"
#include "vlcnoma/precoding.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vlcnoma {

// Gray-coded square M-QAM with unit average power. The first half of each
// label drives the in-phase rail, the second half the quadrature rail.
class Constellation {
  public:
    explicit Constellation(int order);

    int order() const { return order_; }
    int side() const { return side_; }                  // sqrt(M)
    int bits_per_symbol() const { return 2 * rail_bits_; }
    double rail_scale() const { return scale_; }        // spacing / 2
    const std::vector<Complex>& points() const { return points_; }

    Complex point(int label) const { return points_[static_cast<std::size_t>(label)]; }
    int nearest(Complex sample) const;

    std::vector<Complex> modulate(std::span<const std::uint8_t> bits) const;
    std::vector<std::uint8_t> demodulate(std::span<const Complex> samples) const;
    void append_label_bits(int label, std::vector<std::uint8_t>& out) const;

  private:
    int rail_level_index(double v) const;

    int order_;
    int side_;
    int rail_bits_;
    double scale_;
    std::vector<Complex> points_;
    std::vector<int> gray_to_level_;  // gray label -> level index
    std::vector<int> level_to_gray_;
};

struct UserPlan {
    int user_id = 0;
    double qos_rate = 0.0;  // bits per channel use
    double epsilon = 0.0;   // 2^R - 1
    double power = 0.0;
    double lambda = 1.0;
    std::optional<Precoder> precoder;
    int sic_layer = 0;  // 0 is decoded first
};

UserPlan make_user_plan(int user_id, double qos_rate);

// x_k = sum_u sqrt(P_u) s_k^(u), elementwise over aligned streams.
std::vector<Complex> superpose(std::span<const std::vector<Complex>> symbols,
                               std::span<const UserPlan> plans);

struct NoiseBudget {
    double sigma_v2 = 0.0;        // receive-branch noise variance
    double sigma_v2_floor = 0.0;  // Tr(Z^T Z) sigma_v2
    double sigma_delta2 = 0.0;    // (eta / 2) noise floor
    double sigma_o2 = 0.0;        // total effective error variance
    double alpha = 1.0;
    double trace_zz = 0.0;
    double trace_ww = 0.0;
};

// Z = (HP)^+, W = (HP)^+ H. Throws RankDeficient if HP lacks full column rank.
NoiseBudget noise_budget(const Mat& h, const Mat& p, double eta, double sigma_v2, double alpha);

struct Rejection {
    int user_id = 0;
    std::string reason;
};

struct Allocation {
    std::vector<UserPlan> admitted;  // feasible prefix, SIC layers assigned
    std::vector<Rejection> rejected;
    double total_power = 0.0;

    bool feasible() const { return rejected.empty(); }
};

// Minimum QoS power min(1, eps (1 + sigma_o^2) / (1 + eps)).
double qos_power(double epsilon, double sigma_o2);

// Users are admitted in the given order while the budget sum stays <= 1 and
// the user's requirement is attainable; the first failure stops admission.
Allocation allocate_power(std::span<const UserPlan> plans, std::span<const double> sigma_o2);

// Gain-ratio baseline: P_u proportional to (S_1 / S_u)^u, normalized to 1.
std::vector<double> grpa_allocate(std::span<const double> strengths);

// Layer 0 carries the largest power; ties go to the lower user id.
void assign_sic_layers(std::span<UserPlan> plans);

// P_u / (sum of powers on later layers + sigma_o2).
double sinr(std::span<const UserPlan> plans, double sigma_o2, int user_id);
double sinr(std::span<const UserPlan> plans, const NoiseBudget& budget, int user_id);

// Hard-decision SIC over equalized, bias-free samples. Returns bits for every
// plan, indexed like `plans`.
std::vector<std::vector<std::uint8_t>> sic_detect(std::span<const Complex> equalized,
                                                  std::span<const UserPlan> plans,
                                                  const Constellation& constellation);

// Detection order (indices into plans): descending power, ties by user id.
std::vector<std::size_t> sic_order(std::span<const UserPlan> plans);

// SIC on one sample; writes the detected label of every plan into `labels`.
void sic_labels(Complex sample, std::span<const UserPlan> plans, std::span<const std::size_t> order,
                const Constellation& constellation, std::span<int> labels);

}  // namespace vlcnoma
