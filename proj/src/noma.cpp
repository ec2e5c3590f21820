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

#include "vlcnoma/noma.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vlcnoma {

namespace {

int int_sqrt(int m) {
    const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
    return s * s == m ? s : -1;
}

}  // namespace

Constellation::Constellation(int order) : order_(order) {
    if (order != 4 && order != 16 && order != 64)
        throw std::invalid_argument("constellation order must be 4, 16 or 64");
    side_ = int_sqrt(order);
    rail_bits_ = 0;
    while ((1 << rail_bits_) < side_) ++rail_bits_;
    // Levels (2i - (side-1)) * scale have unit average power over both rails.
    scale_ = std::sqrt(3.0 / (2.0 * (order - 1)));

    gray_to_level_.resize(static_cast<std::size_t>(side_));
    level_to_gray_.resize(static_cast<std::size_t>(side_));
    for (int level = 0; level < side_; ++level) {
        const int gray = level ^ (level >> 1);
        level_to_gray_[static_cast<std::size_t>(level)] = gray;
        gray_to_level_[static_cast<std::size_t>(gray)] = level;
    }

    points_.resize(static_cast<std::size_t>(order));
    for (int label = 0; label < order; ++label) {
        const int gi = label >> rail_bits_;
        const int gq = label & (side_ - 1);
        const int li = gray_to_level_[static_cast<std::size_t>(gi)];
        const int lq = gray_to_level_[static_cast<std::size_t>(gq)];
        points_[static_cast<std::size_t>(label)] = {(2 * li - (side_ - 1)) * scale_,
                                                    (2 * lq - (side_ - 1)) * scale_};
    }
}

int Constellation::rail_level_index(double v) const {
    const double idx = std::round((v / scale_ + (side_ - 1)) / 2.0);
    return static_cast<int>(std::clamp(idx, 0.0, static_cast<double>(side_ - 1)));
}

int Constellation::nearest(Complex sample) const {
    const int li = rail_level_index(sample.real());
    const int lq = rail_level_index(sample.imag());
    return (level_to_gray_[static_cast<std::size_t>(li)] << rail_bits_) |
           level_to_gray_[static_cast<std::size_t>(lq)];
}

std::vector<Complex> Constellation::modulate(std::span<const std::uint8_t> bits) const {
    const auto k = static_cast<std::size_t>(bits_per_symbol());
    if (bits.size() % k != 0)
        throw std::invalid_argument("modulate: bit count must be a multiple of log2(M)");
    std::vector<Complex> out;
    out.reserve(bits.size() / k);
    for (std::size_t s = 0; s < bits.size(); s += k) {
        int label = 0;
        for (std::size_t b = 0; b < k; ++b) label = (label << 1) | (bits[s + b] & 1);
        out.push_back(point(label));
    }
    return out;
}

void Constellation::append_label_bits(int label, std::vector<std::uint8_t>& out) const {
    for (int b = bits_per_symbol() - 1; b >= 0; --b)
        out.push_back(static_cast<std::uint8_t>((label >> b) & 1));
}

std::vector<std::uint8_t> Constellation::demodulate(std::span<const Complex> samples) const {
    std::vector<std::uint8_t> out;
    out.reserve(samples.size() * static_cast<std::size_t>(bits_per_symbol()));
    for (const auto& s : samples) append_label_bits(nearest(s), out);
    return out;
}

UserPlan make_user_plan(int user_id, double qos_rate) {
    if (!(qos_rate >= 0.0)) throw std::invalid_argument("QoS rate must be nonnegative");
    UserPlan p;
    p.user_id = user_id;
    p.qos_rate = qos_rate;
    p.epsilon = std::exp2(qos_rate) - 1.0;
    return p;
}

std::vector<Complex> superpose(std::span<const std::vector<Complex>> symbols,
                               std::span<const UserPlan> plans) {
    if (symbols.size() != plans.size())
        throw std::invalid_argument("superpose: one stream per plan is required");
    if (symbols.empty()) return {};
    const std::size_t n = symbols.front().size();
    std::vector<Complex> x(n, Complex{});
    for (std::size_t u = 0; u < symbols.size(); ++u) {
        if (symbols[u].size() != n) throw std::invalid_argument("superpose: misaligned streams");
        const double a = std::sqrt(plans[u].power);
        for (std::size_t k = 0; k < n; ++k) x[k] += a * symbols[u][k];
    }
    return x;
}

NoiseBudget noise_budget(const Mat& h, const Mat& p, double eta, double sigma_v2, double alpha) {
    const Mat hp = h * p;
    if (svd(hp).rank < hp.cols())
        throw RankDeficient("noise_budget: effective channel HP lacks full column rank");
    if (!(alpha != 0.0)) throw std::domain_error("noise_budget: alpha must be nonzero");
    NoiseBudget nb;
    nb.sigma_v2 = sigma_v2;
    nb.alpha = alpha;
    const Mat z = pinv(hp);
    const Mat w = z * h;
    nb.trace_zz = (z.transpose() * z).trace();
    nb.trace_ww = (w.transpose() * w).trace();
    nb.sigma_v2_floor = nb.trace_zz * sigma_v2;
    nb.sigma_delta2 = eta / 2.0 * nb.sigma_v2_floor;
    nb.sigma_o2 = (nb.trace_ww * nb.sigma_delta2 + nb.sigma_v2_floor) / (alpha * alpha);
    return nb;
}

double qos_power(double epsilon, double sigma_o2) {
    if (!(epsilon >= 0.0)) throw std::invalid_argument("qos_power: epsilon must be nonnegative");
    return std::min(1.0, epsilon * (1.0 + sigma_o2) / (1.0 + epsilon));
}

Allocation allocate_power(std::span<const UserPlan> plans, std::span<const double> sigma_o2) {
    if (plans.size() != sigma_o2.size())
        throw std::invalid_argument("allocate_power: one noise level per plan is required");
    Allocation out;
    bool stopped = false;
    for (std::size_t u = 0; u < plans.size(); ++u) {
        if (stopped) {
            out.rejected.push_back({plans[u].user_id, "admission closed by an earlier rejection"});
            continue;
        }
        UserPlan p = plans[u];
        const double required = p.epsilon * (1.0 + sigma_o2[u]) / (1.0 + p.epsilon);
        p.power = qos_power(p.epsilon, sigma_o2[u]);
        if (required > 1.0) {
            out.rejected.push_back({p.user_id, "QoS target unattainable within the unit budget"});
            stopped = true;
        } else if (out.total_power + p.power > 1.0 + 1e-12) {
            out.rejected.push_back({p.user_id, "power budget exceeded"});
            stopped = true;
        } else {
            out.total_power += p.power;
            out.admitted.push_back(std::move(p));
        }
    }
    assign_sic_layers(out.admitted);
    return out;
}

std::vector<double> grpa_allocate(std::span<const double> strengths) {
    if (strengths.empty()) return {};
    std::vector<double> p(strengths.size());
    for (std::size_t u = 0; u < strengths.size(); ++u) {
        if (!(strengths[u] > 0.0)) throw std::domain_error("grpa_allocate: strengths must be positive");
        p[u] = std::pow(strengths[0] / strengths[u], static_cast<double>(u + 1));
    }
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& v : p) v /= total;
    return p;
}

std::vector<std::size_t> sic_order(std::span<const UserPlan> plans) {
    std::vector<std::size_t> idx(plans.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (plans[a].power != plans[b].power) return plans[a].power > plans[b].power;
        return plans[a].user_id < plans[b].user_id;
    });
    return idx;
}

void assign_sic_layers(std::span<UserPlan> plans) {
    const auto order = sic_order(plans);
    for (std::size_t layer = 0; layer < order.size(); ++layer)
        plans[order[layer]].sic_layer = static_cast<int>(layer);
}

double sinr(std::span<const UserPlan> plans, double sigma_o2, int user_id) {
    const auto it = std::find_if(plans.begin(), plans.end(),
                                 [&](const UserPlan& p) { return p.user_id == user_id; });
    if (it == plans.end()) throw std::invalid_argument("sinr: unknown user");
    double interference = 0.0;
    for (const auto& p : plans)
        if (p.sic_layer > it->sic_layer) interference += p.power;
    return it->power / (interference + sigma_o2);
}

double sinr(std::span<const UserPlan> plans, const NoiseBudget& budget, int user_id) {
    return sinr(plans, budget.sigma_o2, user_id);
}

void sic_labels(Complex sample, std::span<const UserPlan> plans, std::span<const std::size_t> order,
                const Constellation& constellation, std::span<int> labels) {
    Complex residual = sample;
    for (std::size_t u : order) {
        const double amp = std::sqrt(plans[u].power);
        const int label = amp > 0.0 ? constellation.nearest(residual / amp) : 0;
        labels[u] = label;
        residual -= amp * constellation.point(label);
    }
}

std::vector<std::vector<std::uint8_t>> sic_detect(std::span<const Complex> equalized,
                                                  std::span<const UserPlan> plans,
                                                  const Constellation& constellation) {
    const auto order = sic_order(plans);
    std::vector<std::vector<std::uint8_t>> bits(plans.size());
    for (auto& b : bits)
        b.reserve(equalized.size() * static_cast<std::size_t>(constellation.bits_per_symbol()));
    std::vector<int> labels(plans.size());
    for (const Complex& sample : equalized) {
        sic_labels(sample, plans, order, constellation, labels);
        for (std::size_t u = 0; u < plans.size(); ++u)
            constellation.append_label_bits(labels[u], bits[u]);
    }
    return bits;
}

}  // namespace vlcnoma
