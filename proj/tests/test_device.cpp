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


#include "vlcnoma/device.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace vlcnoma;

namespace {

double direct_t(int i, double x) {
    switch (i) {
        case 0: return 1.0;
        case 1: return x;
        case 2: return 2 * x * x - 1;
        case 3: return 4 * x * x * x - 3 * x;
        case 4: return 8 * std::pow(x, 4) - 8 * x * x + 1;
        case 5: return 16 * std::pow(x, 5) - 20 * std::pow(x, 3) + 5 * x;
        case 6: return 32 * std::pow(x, 6) - 48 * std::pow(x, 4) + 18 * x * x - 1;
    }
    return 0.0;
}

}  // namespace

TEST_CASE("rapp transfer") {
    LedModel m;
    CHECK(led_apply(0.0, m) == 0.0);
    CHECK(led_apply(1.0, m) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(led_apply(0.5, m) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(led_apply(-0.5, m) == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));

    const auto c = led_apply(std::complex<double>(1.0, 0.5), m);
    CHECK(c.real() == doctest::Approx(0.5));
    CHECK(c.imag() == doctest::Approx(1.0 / 3.0));

    // general p goes through the slow path
    LedModel sharp{2.0, 3.0};
    CHECK(led_apply(2.0, sharp) == doctest::Approx(2.0 / std::pow(2.0, 1.0 / 6.0)));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (const LedModel model : {LedModel{1.0, 0.5}, LedModel{0.7, 2.0}, LedModel{3.0, 0.2}}) {
        for (int k = 0; k < 1000; ++k) {
            double a = u(rng), b = u(rng);
            if (a > b) std::swap(a, b);
            CHECK(led_apply(a, model) <= led_apply(b, model));
            CHECK(std::abs(led_apply(b, model)) < model.i_max);
        }
    }
    CHECK_THROWS((LedModel{0.0, 0.5}).validate());
    CHECK_THROWS((LedModel{1.0, -1.0}).validate());
}

TEST_CASE("chebyshev evaluation") {
    const std::vector<double> t0{1.0, 0.0, 0.0};
    CHECK(chebyshev_eval(t0, 0.37) == 1.0);
    const std::vector<double> t2{0.0, 0.0, 1.0};
    CHECK(chebyshev_eval(t2, 0.5) == doctest::Approx(-0.5).epsilon(1e-15));
    const std::vector<double> t3{0.0, 0.0, 0.0, 1.0};
    CHECK(chebyshev_eval(t3, 0.6) == doctest::Approx(-0.936).epsilon(1e-14));

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> basis(7);
    for (int k = 0; k < 100; ++k) {
        const double x = u(rng);
        chebyshev_basis(x, basis);
        for (int i = 0; i <= 6; ++i) {
            std::vector<double> unit(static_cast<std::size_t>(i + 1), 0.0);
            unit.back() = 1.0;
            CHECK(std::abs(chebyshev_eval(unit, x) - direct_t(i, x)) < 1e-12);
            CHECK(std::abs(basis[static_cast<std::size_t>(i)] - direct_t(i, x)) < 1e-12);
        }
    }
    // complex rails evaluate independently
    const std::vector<double> c{0.2, -0.3, 0.7};
    const auto z = chebyshev_eval(c, std::complex<double>(0.4, -0.8));
    CHECK(z.real() == doctest::Approx(chebyshev_eval(c, 0.4)));
    CHECK(z.imag() == doctest::Approx(chebyshev_eval(c, -0.8)));
}

TEST_CASE("scalar nlms") {
    ScalarNlmsState s{1.0, 0.1, 1.0};
    CHECK(nlms_scalar_step(s, 1.0, 0.5).weight == doctest::Approx(1.05));
    CHECK(nlms_scalar_step(s, 1.0, 1.0).weight == 1.0);
    CHECK(nlms_scalar_step(s, 0.0, 0.3).weight == 1.0);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
        const double x = u(rng);
        s = nlms_scalar_step(s, x, 0.5 * s.weight * x);
    }
    CHECK(s.weight == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("chebyshev nlms step") {
    PredistorterState s{{1.0, 1.0}, 0.1, 1.0};
    const std::vector<double> x{0.5};

    SUBCASE("hand computed step") {
        const std::vector<double> fb{0.4};
        const auto next = cheb_nlms_step(s, x, fb);
        CHECK(next.coeffs[0] == doctest::Approx(1.008).epsilon(1e-14));
        CHECK(next.coeffs[1] == doctest::Approx(1.004).epsilon(1e-14));
        CHECK(next.iteration == 1);
        CHECK(next.rejected == 0);
    }
    SUBCASE("zero error") {
        const std::vector<double> fb{0.5};
        CHECK(cheb_nlms_step(s, x, fb).coeffs == s.coeffs);
    }
    SUBCASE("zero step size") {
        s.eta = 0.0;
        const std::vector<double> fb{-3.0};
        CHECK(cheb_nlms_step(s, x, fb).coeffs == s.coeffs);
    }
    SUBCASE("projection rejects") {
        // a huge positive error drives the expansion negative at x = -0.9
        PredistorterState t{{0.1, 0.0}, 1.9, 1.0};
        const std::vector<double> xs{-0.9, 0.9};
        const std::vector<double> fb{-0.9 + 5.0, 0.9 - 5.0};
        const auto next = cheb_nlms_step(t, xs, fb);
        CHECK(positivity_holds(t.coeffs, xs));
        if (!positivity_holds(next.coeffs, xs)) FAIL("accepted an update that breaks positivity");
        CHECK(next.coeffs == t.coeffs);
        CHECK(next.rejected == 1);
        CHECK(next.iteration == 1);
    }
}

TEST_CASE("projection safety on random steps") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0), e(-2.0, 2.0);
    std::vector<double> probe(64);
    for (auto& p : probe) p = u(rng);
    auto s = find_feasible_init(4, 0.8, 1.0, probe, rng);
    CHECK(positivity_holds(s.coeffs, probe));
    for (int k = 0; k < 2000; ++k) {
        std::vector<double> xs{u(rng), u(rng), u(rng)}, fb(3);
        for (std::size_t i = 0; i < 3; ++i) fb[i] = xs[i] + e(rng);
        const auto next = cheb_nlms_step(s, xs, fb);
        if (next.coeffs != s.coeffs) CHECK(positivity_holds(next.coeffs, xs));
        s = next;
    }
}

TEST_CASE("nlms passivity on a linear plant") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    PredistorterState s{{0.3, 0.2, 0.1, 0.1}, 0.7, 1.0};
    const double gain = 0.8;
    for (int k = 0; k < 5000; ++k) {
        const std::vector<double> x{u(rng)};
        const std::vector<double> fb{gain * s.apply(x[0])};
        const auto next = cheb_nlms_step(s, x, fb);
        const double prior = std::abs(s.beta * x[0] - fb[0]);
        const double post = std::abs(s.beta * x[0] - gain * next.apply(x[0]));
        CHECK(post <= prior + 1e-15);
        s = next;
    }
}

TEST_CASE("feasible initializer") {
    std::mt19937_64 rng(1);
    const std::vector<double> probe{0.1, 0.5, 0.9};
    const auto s = find_feasible_init(5, 0.01, 2.0, probe, rng);
    CHECK(s.coeffs.size() == 5);
    CHECK(s.eta == 0.01);
    CHECK(s.beta == 2.0);
    for (double c : s.coeffs) CHECK((c >= 0.0 && c <= 1.0));
    CHECK(positivity_holds(s.coeffs, probe));

    // no draws allowed
    CHECK_THROWS_AS(find_feasible_init(5, 0.01, 1.0, probe, rng, 0), InfeasibleInit);
}

TEST_CASE("identity plant converges to the T1 term") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    std::vector<double> drive(200000);
    for (auto& d : drive) d = u(rng);
    auto init = find_feasible_init(3, 0.5, 1.0, std::span<const double>(drive).first(100), rng);
    ClosedLoopPlant plant = [](std::span<const double> in, std::span<double> out) {
        for (std::size_t k = 0; k < in.size(); ++k) out[k] = in[k];
    };
    const auto r = train_predistorter(plant, drive, 1, init);
    CHECK(r.trace.window_mse.back() < 1e-6);
    CHECK(r.state.coeffs[0] == doctest::Approx(0.0).epsilon(1e-3));
    CHECK(r.state.coeffs[1] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(r.state.coeffs[2] == doctest::Approx(0.0).epsilon(1e-3));
    CHECK(r.trace.window_mse.size() == 200);
    CHECK(r.trace.smoothed.size() == 200);
}

TEST_CASE("rapp plant training trace") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.1, 0.8);
    std::vector<double> drive(100000);
    for (auto& d : drive) d = u(rng);
    auto init = find_feasible_init(5, 0.00022, 1.0, std::span<const double>(drive).first(1000), rng);
    const LedModel led;
    ClosedLoopPlant plant = [&](std::span<const double> in, std::span<double> out) {
        for (std::size_t k = 0; k < in.size(); ++k) out[k] = led_apply(in[k], led);
    };
    const auto r = train_predistorter(plant, drive, 1, init);
    const auto& s = r.trace.smoothed;
    for (std::size_t w = 1; w < s.size(); ++w) CHECK(s[w] <= 1.05 * s[w - 1]);
    CHECK(s.back() < s.front());

    // eta = 0 freezes the state
    init.eta = 0.0;
    const auto frozen = train_predistorter(plant, std::span<const double>(drive).first(5000), 1, init);
    CHECK(frozen.state.coeffs == init.coeffs);
    CHECK_THROWS(train_predistorter(plant, std::span<const double>(drive).first(5), 2, init));
}

TEST_CASE("epochs repeat the stream") {
    std::vector<double> drive(2000, 0.5);
    PredistorterState s{{0.5, 0.5}, 0.1, 1.0};
    ClosedLoopPlant plant = [](std::span<const double> in, std::span<double> out) {
        for (std::size_t k = 0; k < in.size(); ++k) out[k] = 0.5 * in[k];
    };
    TrainOptions opts;
    opts.epochs = 3;
    const auto r = train_predistorter(plant, drive, 1, s, opts);
    CHECK(r.state.iteration == 6000);
    CHECK(r.trace.window_mse.size() == 6);
}

TEST_CASE("bussgang statistics") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);

    std::vector<double> x(200000), y(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] = u(rng);
        y[k] = 2.0 * x[k];
    }
    auto b = estimate_bussgang(x, y);
    CHECK(b.alpha == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(b.distortion_var < 1e-20);

    const double v = 0.04;
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = x[k] + std::sqrt(v) * g(rng);
    b = estimate_bussgang(x, y);
    CHECK(b.alpha == doctest::Approx(1.0).epsilon(0.01));
    CHECK(b.distortion_var == doctest::Approx(v).epsilon(0.02));
    CHECK(std::abs(b.cross_corr) < 1e-12);

    // Rapp on [0, 0.9]: closed forms for 2p = 1, A(x) = x / (1 + x),
    // E[x A] = int_0^0.9 x^2/(1+x) / 0.9, E[x^2] = 0.27
    const LedModel led;
    std::uniform_real_distribution<double> pos(0.0, 0.9);
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] = pos(rng);
        y[k] = led_apply(x[k], led);
    }
    b = estimate_bussgang(x, y);
    const double exy = (0.9 * 0.9 / 2 - 0.9 + std::log(1.9)) / 0.9;
    const double alpha_ref = exy / 0.27;
    CHECK(b.alpha == doctest::Approx(alpha_ref).epsilon(0.02));

    std::vector<double> x2(1000000), y2(x2.size());
    for (std::size_t k = 0; k < x2.size(); ++k) {
        x2[k] = pos(rng);
        y2[k] = led_apply(x2[k], led);
    }
    const auto ref = estimate_bussgang(x2, y2);
    CHECK(b.distortion_var == doctest::Approx(ref.distortion_var).epsilon(0.02));

    // a fixed gain leaves a correlated residual
    const auto r = bussgang_residual(x, y, 1.0);
    CHECK(r.alpha == 1.0);
    CHECK(r.cross_corr < -0.5);

    std::vector<std::complex<double>> cx{{1.0, 1.0}, {-1.0, 0.5}}, cy{{2.0, 2.0}, {-2.0, 1.0}};
    CHECK(estimate_bussgang(cx, cy).alpha == doctest::Approx(2.0));
    const std::vector<double> zero(10, 0.0);
    CHECK_THROWS_AS(estimate_bussgang(zero, zero), std::domain_error);
}
