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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

namespace vlcnoma {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Full SVD H = U diag(sigma) V^T. U is rows x rows, V is cols x cols, sigma
// has min(rows, cols) entries sorted descending.
struct Svd {
    Mat u;
    Vec sigma;
    Mat v;
    int rank = 0;

    // rows x cols matrix with sigma on the diagonal.
    Mat sigma_matrix() const;
    Mat reconstruct() const;
};

// Relative threshold below which a singular value counts as zero.
inline constexpr double kRankTolerance = 1e-9;

Svd svd(const Mat& h, double rank_tol = kRankTolerance);

int numeric_rank(const Vec& sigma, double rank_tol = kRankTolerance);

// Moore-Penrose pseudo-inverse via SVD; singular values below
// rank_tol * sigma_max are treated as zero.
Mat pinv(const Mat& a, double rank_tol = kRankTolerance);

double spectral_norm(const Mat& a);

// splitmix64 finalizer, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0, std::uint64_t d = 0);

}  // namespace vlcnoma
