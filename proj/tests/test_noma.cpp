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

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

using namespace vlcnoma;

namespace {

std::vector<UserPlan> plans_with_powers(const std::vector<double>& powers) {
    std::vector<UserPlan> out;
    for (std::size_t u = 0; u < powers.size(); ++u) {
        auto p = make_user_plan(static_cast<int>(u + 1), 1.0);
        p.power = powers[u];
        out.push_back(p);
    }
    assign_sic_layers(out);
    return out;
}

}  // namespace

TEST_CASE("constellation geometry") {
    const Constellation q4(4);
    CHECK(q4.side() == 2);
    CHECK(q4.bits_per_symbol() == 2);
    for (const auto& s : q4.points()) {
        CHECK(std::abs(std::abs(s.real()) - 1.0 / std::sqrt(2.0)) < 1e-15);
        CHECK(std::abs(std::abs(s.imag()) - 1.0 / std::sqrt(2.0)) < 1e-15);
    }
    const Constellation q16(16);
    std::set<double> levels;
    for (const auto& s : q16.points()) levels.insert(std::round(s.real() * std::sqrt(10.0) * 1e9) / 1e9);
    CHECK(levels == std::set<double>{-3.0, -1.0, 1.0, 3.0});

    for (int m : {4, 16, 64}) {
        const Constellation q(m);
        double e = 0.0;
        for (const auto& s : q.points()) e += std::norm(s);
        CHECK(std::abs(e / m - 1.0) < 1e-12);
        std::set<std::pair<double, double>> distinct;
        for (const auto& s : q.points()) distinct.insert({s.real(), s.imag()});
        CHECK(distinct.size() == static_cast<std::size_t>(m));
        for (int label = 0; label < m; ++label) CHECK(q.nearest(q.point(label)) == label);
    }
    CHECK_THROWS_AS(Constellation(8), std::invalid_argument);
    CHECK_THROWS_AS(Constellation(9), std::invalid_argument);
}

TEST_CASE("gray mapping") {
    // horizontal and vertical neighbours differ in one bit
    for (int m : {4, 16, 64}) {
        const Constellation q(m);
        const double step = 2.0 * q.rail_scale();
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
                const double d = std::abs(q.point(a) - q.point(b));
                if (std::abs(d - step) < 1e-9) CHECK(std::popcount(static_cast<unsigned>(a ^ b)) == 1);
            }
    }
}

TEST_CASE("modulate and demodulate round trip") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> bit(0, 1);
    for (int m : {4, 16, 64}) {
        const Constellation q(m);
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(q.bits_per_symbol()) * 500);
        for (auto& b : bits) b = static_cast<std::uint8_t>(bit(rng));
        const auto syms = q.modulate(bits);
        CHECK(syms.size() == 500);
        CHECK(q.demodulate(syms) == bits);
        const std::vector<std::uint8_t> odd(static_cast<std::size_t>(q.bits_per_symbol()) + 1, 0);
        CHECK_THROWS(q.modulate(odd));
    }
}

TEST_CASE("superposition") {
    const Constellation q(4);
    auto single = plans_with_powers({1.0});
    const std::vector<std::vector<Complex>> one{{q.point(0), q.point(3)}};
    const auto x1 = superpose(one, single);
    CHECK(x1[0] == q.point(0));
    CHECK(x1[1] == q.point(3));

    const auto two = plans_with_powers({0.75, 0.25});
    const std::vector<std::vector<Complex>> s{{Complex(1.0, 0.0)}, {Complex(-1.0, 0.0)}};
    CHECK(superpose(s, two)[0].real() == doctest::Approx(0.3660254037844386).epsilon(1e-15));

    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> pick(0, 15);
    const Constellation q16(16);
    const auto three = plans_with_powers({0.5, 0.3, 0.2});
    std::vector<std::vector<Complex>> streams(3, std::vector<Complex>(100000));
    for (auto& st : streams)
        for (auto& v : st) v = q16.point(pick(rng));
    const auto x = superpose(streams, three);
    double e = 0.0;
    for (const auto& v : x) e += std::norm(v);
    CHECK(e / 100000.0 == doctest::Approx(1.0).epsilon(0.01));

    const std::vector<std::vector<Complex>> ragged{{Complex(1.0)}, {}};
    CHECK_THROWS(superpose(ragged, two));
}

TEST_CASE("noise budget") {
    const Mat i2 = Mat::Identity(2, 2);
    auto nb = noise_budget(i2, i2, 0.00022, 0.03, 1.0);
    CHECK(nb.sigma_v2_floor == doctest::Approx(0.06).epsilon(1e-15));

    nb = noise_budget(i2, i2, 0.0, 0.03, 1.0);
    CHECK(nb.sigma_o2 == doctest::Approx(nb.sigma_v2_floor).epsilon(1e-15));

    Mat h = Mat::Zero(2, 2);
    h(0, 0) = 2.0;
    h(1, 1) = 1.0;
    nb = noise_budget(h, i2, 0.00022, 0.01, 1.0);
    CHECK(nb.trace_zz == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(nb.sigma_v2_floor == doctest::Approx(0.0125).epsilon(1e-15));
    CHECK(nb.trace_ww == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(nb.sigma_delta2 == doctest::Approx(1.375e-6).epsilon(1e-13));
    // 2 * 1.375e-6 + 0.0125
    CHECK(nb.sigma_o2 == doctest::Approx(0.01250275).epsilon(1e-13));

    nb = noise_budget(h, i2, 0.00022, 0.01, 0.5);
    CHECK(nb.sigma_o2 == doctest::Approx(4.0 * 0.01250275).epsilon(1e-13));

    Mat rank1(2, 2);
    rank1 << 1.0, 1.0, 1.0, 1.0;
    CHECK_THROWS_AS(noise_budget(rank1, i2, 0.0, 0.01, 1.0), RankDeficient);
}

TEST_CASE("qos power allocation") {
    CHECK(qos_power(1.0, 0.0) == 0.5);
    CHECK(qos_power(3.0, 0.0) == 0.75);
    CHECK(qos_power(3.0, 100.0) == 1.0);
    CHECK(make_user_plan(1, 2.0).epsilon == 3.0);

    // three-user worked example, reference from mpmath
    const std::vector<UserPlan> plans{make_user_plan(1, 0.7), make_user_plan(2, 0.6), make_user_plan(3, 0.4)};
    const std::vector<double> zero(3, 0.0);
    const auto a = allocate_power(plans, zero);
    REQUIRE(a.feasible());
    CHECK(a.admitted[0].power == doctest::Approx(0.3844277933275419).epsilon(1e-13));
    CHECK(a.admitted[1].power == doctest::Approx(0.3402460446135529).epsilon(1e-13));
    CHECK(a.admitted[2].power == doctest::Approx(0.2421417167448010).epsilon(1e-13));
    CHECK(a.total_power == doctest::Approx(0.9668155546858957).epsilon(1e-13));
    CHECK(std::log2(1.0 + sinr(a.admitted, 0.0, 1)) == doctest::Approx(0.7312606459932010).epsilon(1e-12));
    CHECK(std::log2(1.0 + sinr(a.admitted, 0.0, 2)) == doctest::Approx(1.266128386559806).epsilon(1e-12));
    CHECK(a.admitted[0].sic_layer == 0);
    CHECK(a.admitted[2].sic_layer == 2);
}

TEST_CASE("admission stops at the first violation") {
    const std::vector<UserPlan> plans{make_user_plan(1, 0.7), make_user_plan(2, 0.6), make_user_plan(3, 0.4),
                                      make_user_plan(4, 0.4), make_user_plan(5, 0.01)};
    const std::vector<double> zero(5, 0.0);
    const auto a = allocate_power(plans, zero);
    CHECK(a.admitted.size() == 3);
    REQUIRE(a.rejected.size() == 2);
    CHECK(a.rejected[0].user_id == 4);
    CHECK(a.rejected[0].reason == "power budget exceeded");
    CHECK(a.rejected[1].user_id == 5);
    CHECK(a.total_power <= 1.0);

    const std::vector<UserPlan> greedy{make_user_plan(1, 0.5)};
    const std::vector<double> huge{50.0};
    const auto b = allocate_power(greedy, huge);
    CHECK(b.admitted.empty());
    CHECK(b.rejected[0].reason == "QoS target unattainable within the unit budget");
}

TEST_CASE("qos satisfaction on random vectors") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> rate(0.05, 1.2), noise(0.0, 0.2);
    std::uniform_int_distribution<int> count(1, 4);
    int tested = 0;
    while (tested < 100) {
        const int n = count(rng);
        std::vector<UserPlan> plans;
        std::vector<double> s2;
        for (int u = 0; u < n; ++u) {
            plans.push_back(make_user_plan(u + 1, rate(rng)));
            s2.push_back(noise(rng));
        }
        const auto a = allocate_power(plans, s2);
        if (!a.feasible()) continue;
        ++tested;
        CHECK(a.total_power <= 1.0 + 1e-12);
        for (const auto& p : a.admitted) {
            const double g = sinr(a.admitted, s2[static_cast<std::size_t>(p.user_id - 1)], p.user_id);
            CHECK(std::log2(1.0 + g) >= p.qos_rate - 1e-12);
        }
    }
}

TEST_CASE("gain ratio baseline") {
    const std::vector<double> eq{2.0, 2.0};
    const auto p = grpa_allocate(eq);
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
    const std::vector<double> s{1.0, 2.0};
    const auto q = grpa_allocate(s);
    CHECK(q[0] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(q[1] == doctest::Approx(0.2).epsilon(1e-15));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int k = 0; k < 100; ++k) {
        std::vector<double> st(4);
        for (auto& v : st) v = u(rng);
        const auto w = grpa_allocate(st);
        CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) < 1e-12);
    }
}

TEST_CASE("sinr") {
    CHECK(sinr(plans_with_powers({1.0}), 0.1, 1) == doctest::Approx(10.0));
    const auto two = plans_with_powers({0.75, 0.25});
    CHECK(sinr(two, 0.01, 1) == doctest::Approx(0.75 / 0.26).epsilon(1e-15));
    CHECK(sinr(two, 0.01, 2) == doctest::Approx(25.0).epsilon(1e-15));
    NoiseBudget nb;
    nb.sigma_o2 = 0.01;
    CHECK(sinr(two, nb, 1) == sinr(two, 0.01, 1));
    CHECK_THROWS(sinr(two, 0.01, 9));
}

TEST_CASE("sic order") {
    const auto p = plans_with_powers({0.2, 0.5, 0.2, 0.1});
    const auto order = sic_order(p);
    CHECK(order == std::vector<std::size_t>{1, 0, 2, 3});
    CHECK(p[1].sic_layer == 0);
    CHECK(p[0].sic_layer == 1);
    CHECK(p[2].sic_layer == 2);
}

TEST_CASE("sic detection") {
    std::mt19937_64 rng(13);
    // QoS vectors whose powers leave every layer above the residual peak
    const std::vector<std::pair<int, std::vector<double>>> cases{{4, {1.8, 0.3, 0.1}}, {16, {3.5, 0.1}}};
    for (const auto& [m, rates] : cases) {
        const Constellation q(m);
        std::uniform_int_distribution<int> pick(0, m - 1);
        std::vector<UserPlan> req;
        for (std::size_t u = 0; u < rates.size(); ++u) req.push_back(make_user_plan(static_cast<int>(u + 1), rates[u]));
        for (std::size_t n = 1; n <= rates.size(); ++n) {
            std::vector<double> zero(n, 0.0);
            const auto a = allocate_power(std::span(req).first(n), zero);
            std::vector<std::vector<Complex>> syms(n, std::vector<Complex>(2000));
            std::vector<std::vector<std::uint8_t>> bits(n);
            for (std::size_t u = 0; u < n; ++u)
                for (auto& s : syms[u]) {
                    const int l = pick(rng);
                    s = q.point(l);
                    q.append_label_bits(l, bits[u]);
                }
            const auto x = superpose(syms, a.admitted);
            const auto got = sic_detect(x, a.admitted, q);
            for (std::size_t u = 0; u < n; ++u) CHECK(got[u] == bits[u]);
        }
    }

    // near-zero noise, two users
    const Constellation q(4);
    const auto two = plans_with_powers({0.75, 0.25});
    std::uniform_int_distribution<int> pick(0, 3);
    std::normal_distribution<double> g(0.0, std::sqrt(1e-6 / 2));
    std::vector<Complex> rx;
    std::vector<std::vector<std::uint8_t>> bits(2);
    for (int k = 0; k < 100000; ++k) {
        const int a = pick(rng), b = pick(rng);
        q.append_label_bits(a, bits[0]);
        q.append_label_bits(b, bits[1]);
        rx.push_back(std::sqrt(0.75) * q.point(a) + std::sqrt(0.25) * q.point(b) + Complex(g(rng), g(rng)));
    }
    const auto got = sic_detect(rx, two, q);
    for (std::size_t u = 0; u < 2; ++u) {
        std::size_t err = 0;
        for (std::size_t i = 0; i < bits[u].size(); ++i) err += got[u][i] != bits[u][i];
        CHECK(static_cast<double>(err) / static_cast<double>(bits[u].size()) < 1e-4);
    }
}
