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

#include "vlcnoma/linalg.hpp"

#include <algorithm>

namespace vlcnoma {

Mat Svd::sigma_matrix() const {
    Mat s = Mat::Zero(u.cols(), v.cols());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) s(i, i) = sigma(i);
    return s;
}

Mat Svd::reconstruct() const { return u * sigma_matrix() * v.transpose(); }

Svd svd(const Mat& h, double rank_tol) {
    Eigen::JacobiSVD<Mat> dec(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Svd out;
    out.u = dec.matrixU();
    out.sigma = dec.singularValues();
    out.v = dec.matrixV();
    out.rank = numeric_rank(out.sigma, rank_tol);
    return out;
}

int numeric_rank(const Vec& sigma, double rank_tol) {
    if (sigma.size() == 0) return 0;
    const double top = sigma.maxCoeff();
    if (top <= 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        if (sigma(i) > rank_tol * top) ++r;
    return r;
}

Mat pinv(const Mat& a, double rank_tol) {
    Eigen::JacobiSVD<Mat> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& s = dec.singularValues();
    Vec inv = Vec::Zero(s.size());
    const double top = s.size() ? s.maxCoeff() : 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rank_tol * top) inv(i) = 1.0 / s(i);
    return dec.matrixV() * inv.asDiagonal() * dec.matrixU().transpose();
}

double spectral_norm(const Mat& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> dec(a);
    return dec.singularValues()(0);
}

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c, std::uint64_t d) {
    std::uint64_t s = mix_seed(master);
    for (std::uint64_t part : {a, b, c, d}) s = mix_seed(s ^ mix_seed(part + 1));
    return s;
}

}  // namespace vlcnoma
