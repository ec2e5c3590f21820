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

// Analytic oracles: superposed-constellation modulus ladder, M-QAM BER
// bounds, estimation-error noise, sum rate and a Monte Carlo check of the
// Gibbs rate-gap bound.

#include "vlcnoma/linalg.hpp"
#include "vlcnoma/noma.hpp"

#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace vlcnoma {

struct LadderEntry {
    Complex point;     // partial superposition sum_{u<=b} sqrt(P_u) s_u
    double mu = 0.0;   // |point|
    std::size_t parent = 0;
};

// layers[0] is the root {0}; layers[b] has M^b entries.
struct MuLadder {
    int order = 0;
    std::vector<std::vector<LadderEntry>> layers;

    int user_count() const { return static_cast<int>(layers.size()) - 1; }
    std::vector<double> moduli(int layer) const;
};

// |a e^{j phi} + mu e^{j theta}| by the law of cosines.
double vector_add(double a, double phi, double mu, double theta);

// powers in SIC order.
MuLadder mu_ladder(const Constellation& constellation, std::span<const double> powers);

double q_function(double z);

// sigma2 is the effective noise variance; 0 gives 0.
double ber_sqrt_m(const MuLadder& ladder, double sigma2);
double ber_qam(double p_sqrt_m);

struct EstErrorBudget {
    double sigma_gamma2 = 0.0;
    double lambda = 1.0;
    double trace_inv_tx = 0.0;  // Tr(S1^-T S1^-1), transmit side
    double trace_inv_rx = 0.0;  // Tr(S2^-T S2^-1), receive side
    double signal_energy = 1.0; // E ||x||^2
};

// Builds the traces from singular values on the rank support. Throws
// std::domain_error if the support is empty.
EstErrorBudget make_est_error_budget(const Vec& sigma_tx, const Vec& sigma_rx, int rank,
                                     double sigma_gamma2, double lambda, double signal_energy);

double sigma_o_prime(double sigma_o2, const EstErrorBudget& est);

struct RateReport {
    std::vector<double> rates;  // log2(1 + SINR) per plan
    std::vector<bool> outage;   // rate below the QoS target
    double sum = 0.0;           // over users meeting their target
};

RateReport sum_rate(std::span<const UserPlan> plans, std::span<const double> sigma_o2);

struct Theorem1Case {
    Vec sigma_b;        // singular values of user b
    Vec sigma_b_prime;  // singular values of user b'
    double lambda_b = 1.0;
    double lambda_b_prime = 1.0;
    double kappa = 1.0;
};

struct Theorem1Report {
    double lhs = 0.0;        // Monte Carlo mean of the rate-gap expression
    double lhs_stderr = 0.0;
    double rhs = 0.0;
    double margin = 0.0;     // lhs - rhs
    double entropy = 0.0;
    double log_partition = 0.0;
    double mean_delta = 0.0; // kappa (H - log Z)
    bool holds = false;      // lhs >= rhs - 3 stderr
    bool degenerate_gap = false;
};

class DegenerateSupport : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

inline constexpr std::size_t kGibbsGridPoints = 10000;

Theorem1Report verify_theorem1(const Theorem1Case& c, std::size_t n_samples, std::mt19937_64& rng);

}  // namespace vlcnoma
