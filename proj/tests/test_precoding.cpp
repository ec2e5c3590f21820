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


#include "vlcnoma/precoding.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace vlcnoma;

namespace {

Mat random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> g;
    Mat m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    return m;
}

Mat diag2(double a, double b) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

}  // namespace

TEST_CASE("svd precoder closed forms") {
    const Svd d = svd(diag2(2.0, 0.5));
    const auto p = svd_precoder(d, 2.0);
    CHECK((p.matrix().cwiseAbs() - diag2(2.0, 0.5)).cwiseAbs().maxCoeff() < 1e-14);
    const Mat hp = diag2(2.0, 0.5) * p.matrix();
    CHECK((hp.cwiseAbs() - diag2(4.0, 0.25)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(p.lambda() == 2.0);
    CHECK(p.variant() == PrecoderVariant::Svd);

    // lambda = 1 gives V
    std::mt19937_64 rng(1);
    const Mat h = random_matrix(rng, 3, 3);
    const Svd s = svd(h);
    CHECK((svd_precoder(s, 1.0).matrix() - s.v).cwiseAbs().maxCoeff() < 1e-14);

    // orthonormal channel: V for every lambda
    const Mat q = Eigen::HouseholderQR<Mat>(h).householderQ();
    const Svd so = svd(q);
    for (double lambda : {0.3, 1.0, 2.5})
        CHECK((svd_precoder(so, lambda).matrix() - so.v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rank truncation has no pole") {
    Mat h(2, 2);
    h << 1.0, 2.0, 2.0, 4.0;
    const Svd s = svd(h);
    REQUIRE(s.rank == 1);
    const auto p = svd_precoder(s, 0.5);
    CHECK(p.matrix().allFinite());
    CHECK(p.matrix().col(1).norm() == 0.0);
    CHECK_THROWS_AS(svd_precoder(svd(Mat::Zero(2, 2)), 1.0), RankDeficient);
}

TEST_CASE("parallel channel identity") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const Mat h = random_matrix(rng, 3, 3).cwiseAbs();
        const Svd s = svd(h);
        for (double lambda : {0.5, 1.0, 2.0}) {
            const Mat hp = h * svd_precoder(s, lambda).matrix();
            Mat us = s.u * s.sigma_matrix();
            for (Eigen::Index g = 0; g < s.sigma.size(); ++g)
                us.col(g) = s.u.col(g) * std::pow(s.sigma(g), lambda);
            CHECK(spectral_norm(hp - us) <= 1e-9 * spectral_norm(h));
        }
    }
}

TEST_CASE("effective trace is monotone in lambda") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Mat h = random_matrix(rng, 2, 2);
        Svd s = svd(h);
        h /= s.sigma.minCoeff() / 1.5;  // every singular value above 1
        s = svd(h);
        double prev = -1.0;
        for (double lambda = 0.25; lambda <= 3.0; lambda += 0.25) {
            const Mat hp = h * svd_precoder(s, lambda).matrix();
            const double tr = (hp.transpose() * hp).trace();
            CHECK(tr > prev);
            prev = tr;
        }
    }
}

TEST_CASE("lambda plan") {
    const std::vector<double> same{3.0, 3.0, 3.0};
    for (double l : assign_lambdas(same, 1.7).lambdas) CHECK(l == 1.7);

    const std::vector<double> s{10.0, 100.0};
    const auto plan = assign_lambdas(s, 1.0);
    CHECK(plan.lambdas[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(plan.kappa == doctest::Approx(std::log(10.0)));

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(1.05, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> strengths(4);
        for (auto& v : strengths) v = u(rng);
        const auto p = assign_lambdas(strengths, 0.5 + trial * 0.01);
        const double k0 = p.lambdas[0] * std::log(strengths[0]);
        for (std::size_t i = 0; i < strengths.size(); ++i) {
            CHECK(std::abs(p.lambdas[i] * std::log(strengths[i]) - k0) / std::abs(k0) < 1e-9);
            CHECK(p.lambdas[i] > 0.0);
        }
    }
    const std::vector<double> unit{2.0, 1.0};
    CHECK_THROWS_AS(assign_lambdas(unit, 1.0), std::domain_error);
    const std::vector<double> neg{2.0, -1.0};
    CHECK_THROWS_AS(assign_lambdas(neg, 1.0), std::domain_error);
}

TEST_CASE("bias offset") {
    CHECK(bias_offset(Mat::Identity(2, 2)) == 1.0);
    Mat p(2, 2);
    p << 1.0, -2.0, 0.5, 0.5;
    CHECK(bias_offset(p) == 3.0);
    CHECK(Precoder(p, 1.0, PrecoderVariant::Svd).bias() == 3.0);
    CHECK(Precoder(p, 1.0, PrecoderVariant::Svd).active(1).bias() == 1.0);

    // 4-QAM style rails in [-1, 1] stay nonnegative after the offset
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> sign(0, 1);
    for (int trial = 0; trial < 10; ++trial) {
        const Mat m = random_matrix(rng, 3, 3);
        const double off = bias_offset(m);
        for (int k = 0; k < 1000; ++k) {
            Vec xr(3), xi(3);
            for (int i = 0; i < 3; ++i) {
                xr(i) = sign(rng) ? 1.0 : -1.0;
                xi(i) = sign(rng) ? 1.0 : -1.0;
            }
            CHECK((m * xr).array().minCoeff() + off >= -1e-12);
            CHECK((m * xi).array().minCoeff() + off >= -1e-12);
        }
    }
}

TEST_CASE("qr enhancement") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const Mat h1 = random_matrix(rng, 2, 2), h2 = random_matrix(rng, 2, 2);
        const Svd s1 = svd(h1), s2 = svd(h2);
        const std::vector<Precoder> ps{svd_precoder(s1, 1.5), svd_precoder(s2, 0.7)};
        const auto enh = qr_enhance(ps, s1, 1.5);
        CHECK((enh.q.transpose() * enh.q - Mat::Identity(2, 2)).norm() < 1e-10);
        const Mat eff = h1 * enh.precoders[0].matrix();
        CHECK(std::abs(eff(0, 1)) < 1e-10);
        CHECK(enh.precoders[0].variant() == PrecoderVariant::SvdQr);
        CHECK(enh.precoders[1].bias() == doctest::Approx(bias_offset(ps[1].matrix() * enh.q)));
    }
    const Svd id = svd(Mat::Identity(2, 2));
    const std::vector<Precoder> ps{svd_precoder(id, 1.0)};
    const auto enh = qr_enhance(ps, id, 1.0);
    CHECK((enh.q - Mat::Identity(2, 2)).norm() < 1e-14);
    CHECK((enh.precoders[0].matrix() - Mat::Identity(2, 2)).norm() < 1e-14);

    Mat singular(2, 2);
    singular << 1.0, 1.0, 1.0, 1.0;
    CHECK_THROWS_AS(qr_enhance(ps, svd(singular), 1.0), RankDeficient);
}

TEST_CASE("zero forcing") {
    const auto pi = zf_precoder(Mat::Identity(2, 2));
    CHECK((pi.matrix() - Mat::Identity(2, 2)).norm() < 1e-14);

    const Mat h = diag2(2.0, 1.0);
    const Mat hp = h * zf_precoder(h).matrix();
    CHECK(std::abs(hp(0, 1)) < 1e-10);
    CHECK(std::abs(hp(1, 0)) < 1e-10);
    CHECK(hp(0, 0) == doctest::Approx(hp(1, 1)).epsilon(1e-10));

    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const Mat m = random_matrix(rng, 2, 3);
        const auto p = zf_precoder(m);
        CHECK(p.matrix().norm() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
        const Svd s = svd(m * p.matrix());
        CHECK(s.sigma(0) / s.sigma(s.sigma.size() - 1) == doctest::Approx(1.0).epsilon(1e-8));
    }
    Mat rank1(2, 2);
    rank1 << 1.0, 2.0, 2.0, 4.0;
    CHECK_THROWS_AS(zf_precoder(rank1), RankDeficient);
}
