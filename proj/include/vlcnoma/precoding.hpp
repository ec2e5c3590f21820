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

// SVD-exponent precoders P = V Sigma^(lambda - 1), the per-user exponent
// plan, the non-negativity bias and two baselines (QR enhancement and
// zero forcing).

#include "vlcnoma/linalg.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vlcnoma {

enum class PrecoderVariant { Svd, SvdQr, ZeroForcing };

std::string to_string(PrecoderVariant v);

// Largest l1 norm over the rows of p.
double bias_offset(const Mat& p);

class Precoder {
  public:
    Precoder() = default;
    Precoder(Mat matrix, double lambda, PrecoderVariant variant);

    const Mat& matrix() const { return matrix_; }
    double lambda() const { return lambda_; }
    double bias() const { return bias_; }
    PrecoderVariant variant() const { return variant_; }

    // Keeps the first `streams` columns and recomputes the bias.
    Precoder active(int streams) const;
    Precoder right_multiplied(const Mat& q, PrecoderVariant variant) const;

  private:
    Mat matrix_;
    double lambda_ = 1.0;
    double bias_ = 0.0;
    PrecoderVariant variant_ = PrecoderVariant::Svd;
};

// Singular values beyond the rank map to a zero column, never a pole.
Precoder svd_precoder(const Svd& channel, double lambda);

class RankDeficient : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

struct LambdaPlan {
    std::vector<double> lambdas;    // in recursion order
    std::vector<double> strengths;  // S = sum of squared singular values
    double kappa = 0.0;             // lambda * log S, common to every user
};

// lambda_{u+1} = lambda_u log S_u / log S_{u+1}, starting from lambda1.
LambdaPlan assign_lambdas(std::span<const double> strengths, double lambda1);

// Favors user `favored`: Q comes from the QR factorization of
// (U Sigma^lambda)^T, and every precoder is right-multiplied by Q so that the
// favored user's effective channel becomes lower triangular.
struct QrEnhanced {
    std::vector<Precoder> precoders;
    Mat q;
};

QrEnhanced qr_enhance(std::span<const Precoder> precoders, const Svd& favored_channel,
                      double favored_lambda);

// Pseudo-inverse of a full-row-rank channel, scaled to ||P||_F = sqrt(M_T).
Precoder zf_precoder(const Mat& h);

}  // namespace vlcnoma
