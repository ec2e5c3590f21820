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

#include "vlcnoma/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vlcnoma {

std::vector<double> MuLadder::moduli(int layer) const {
    std::vector<double> out;
    const auto& l = layers.at(static_cast<std::size_t>(layer));
    out.reserve(l.size());
    for (const auto& e : l) out.push_back(e.mu);
    return out;
}

double vector_add(double a, double phi, double mu, double theta) {
    const double sq = a * a + mu * mu + 2.0 * a * mu * std::cos(phi - theta);
    return std::sqrt(std::max(0.0, sq));
}

MuLadder mu_ladder(const Constellation& constellation, std::span<const double> powers) {
    MuLadder ladder;
    ladder.order = constellation.order();
    ladder.layers.push_back({LadderEntry{}});
    for (double p : powers) {
        if (!(p >= 0.0)) throw std::invalid_argument("mu_ladder: powers must be nonnegative");
        const double amp = std::sqrt(p);
        const auto& prev = ladder.layers.back();
        std::vector<LadderEntry> next;
        next.reserve(prev.size() * constellation.points().size());
        for (std::size_t i = 0; i < prev.size(); ++i) {
            const double theta = std::arg(prev[i].point);
            for (const Complex& s : constellation.points()) {
                LadderEntry e;
                e.point = prev[i].point + amp * s;
                e.mu = vector_add(amp * std::abs(s), std::arg(s), prev[i].mu, theta);
                e.parent = i;
                next.push_back(e);
            }
        }
        ladder.layers.push_back(std::move(next));
    }
    return ladder;
}

double q_function(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double ber_sqrt_m(const MuLadder& ladder, double sigma2) {
    if (!(sigma2 >= 0.0)) throw std::invalid_argument("ber_sqrt_m: noise variance must be nonnegative");
    if (sigma2 == 0.0) return 0.0;
    const double sigma = std::sqrt(sigma2);
    const double side = std::sqrt(static_cast<double>(ladder.order));
    double acc = 0.0;
    for (std::size_t b = 1; b < ladder.layers.size(); ++b) {
        const auto& parents = ladder.layers[b - 1];
        for (const auto& e : ladder.layers[b])
            acc += q_function(std::abs(e.mu - parents[e.parent].mu) / sigma);
    }
    return std::clamp(2.0 * (side - 1.0) / side * acc, 0.0, 1.0);
}

double ber_qam(double p_sqrt_m) {
    if (!(p_sqrt_m >= 0.0 && p_sqrt_m <= 1.0))
        throw std::invalid_argument("ber_qam: probability outside [0, 1]");
    return 1.0 - (1.0 - p_sqrt_m) * (1.0 - p_sqrt_m);
}

namespace {

double trace_inv_sq(const Vec& sigma, int rank) {
    double t = 0.0;
    for (int g = 0; g < rank; ++g) {
        if (!(sigma(g) > 0.0)) throw std::domain_error("singular value vanishes on the rank support");
        t += 1.0 / (sigma(g) * sigma(g));
    }
    return t;
}

}  // namespace

EstErrorBudget make_est_error_budget(const Vec& sigma_tx, const Vec& sigma_rx, int rank,
                                     double sigma_gamma2, double lambda, double signal_energy) {
    if (rank <= 0 || rank > sigma_tx.size() || rank > sigma_rx.size())
        throw std::domain_error("estimation-error budget needs a nonempty rank support");
    EstErrorBudget est;
    est.sigma_gamma2 = sigma_gamma2;
    est.lambda = lambda;
    est.trace_inv_tx = trace_inv_sq(sigma_tx, rank);
    est.trace_inv_rx = trace_inv_sq(sigma_rx, rank);
    est.signal_energy = signal_energy;
    return est;
}

double sigma_o_prime(double sigma_o2, const EstErrorBudget& est) {
    const double l = est.lambda;
    return sigma_o2 + est.sigma_gamma2 * l * l * est.trace_inv_rx * est.signal_energy +
           est.sigma_gamma2 * (1.0 - l) * (1.0 - l) * est.trace_inv_tx * est.signal_energy;
}

RateReport sum_rate(std::span<const UserPlan> plans, std::span<const double> sigma_o2) {
    if (plans.size() != sigma_o2.size())
        throw std::invalid_argument("sum_rate: one noise level per plan is required");
    RateReport r;
    for (std::size_t u = 0; u < plans.size(); ++u) {
        const double rate = std::log2(1.0 + sinr(plans, sigma_o2[u], plans[u].user_id));
        // Small slack so a plan allocated exactly at its target is not an outage.
        const bool out = rate < plans[u].qos_rate * (1.0 - 1e-12) - 1e-12;
        r.rates.push_back(rate);
        r.outage.push_back(out);
        if (!out) r.sum += rate;
    }
    return r;
}

Theorem1Report verify_theorem1(const Theorem1Case& c, std::size_t n_samples, std::mt19937_64& rng) {
    if (!(c.kappa > 0.0)) throw std::domain_error("verify_theorem1: kappa must be positive");
    if (n_samples < 2) throw std::invalid_argument("verify_theorem1: need at least two samples");
    const auto g_count = std::min(c.sigma_b.size(), c.sigma_b_prime.size());

    double k_term = 0.0;
    std::vector<double> base;
    for (Eigen::Index g = 0; g < g_count; ++g) {
        const double sb = c.sigma_b(g);
        const double sbp = c.sigma_b_prime(g);
        if (!(sb > 0.0 && sbp > 0.0)) continue;
        k_term += std::pow(sb / sbp, 2.0 * c.lambda_b);
        base.push_back(sbp * sbp);
    }

    // Truncated, discretized Gibbs density on [0, 10 kappa].
    const std::size_t n = kGibbsGridPoints;
    const double top = 10.0 * c.kappa;
    std::vector<double> grid(n), weight(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = top * static_cast<double>(i) / static_cast<double>(n - 1);
        weight[i] = std::exp(-grid[i] / c.kappa);
    }
    const double z = std::accumulate(weight.begin(), weight.end(), 0.0);
    double entropy = 0.0;
    for (double w : weight) {
        const double p = w / z;
        if (p > 0.0) entropy -= p * std::log(p);
    }
    if (!(entropy > 0.0)) throw DegenerateSupport("Gibbs support has zero entropy");

    Theorem1Report rep;
    rep.entropy = entropy;
    rep.log_partition = std::log(z);
    rep.mean_delta = c.kappa * (entropy - rep.log_partition);

    std::discrete_distribution<std::size_t> pick(weight.begin(), weight.end());
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t k = 0; k < n_samples; ++k) {
        const double dl = grid[pick(rng)];
        double v = k_term;
        for (double b2 : base) v += std::pow(b2, dl);
        const double delta = v - mean;
        mean += delta / static_cast<double>(k + 1);
        m2 += delta * (v - mean);
    }
    rep.lhs = mean;
    rep.lhs_stderr = std::sqrt(m2 / static_cast<double>(n_samples - 1) / static_cast<double>(n_samples));
    rep.rhs = k_term;
    for (double b2 : base) rep.rhs += std::pow(b2, rep.mean_delta);
    rep.margin = rep.lhs - rep.rhs;
    rep.holds = rep.lhs >= rep.rhs - 3.0 * rep.lhs_stderr;
    rep.degenerate_gap = c.lambda_b == c.lambda_b_prime || c.sigma_b == c.sigma_b_prime;
    return rep;
}

}  // namespace vlcnoma
