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

#include <cmath>

namespace vlcnoma {

std::string to_string(PrecoderVariant v) {
    switch (v) {
        case PrecoderVariant::Svd: return "svd";
        case PrecoderVariant::SvdQr: return "svd+qr";
        case PrecoderVariant::ZeroForcing: return "zero-forcing";
    }
    return "unknown";
}

double bias_offset(const Mat& p) {
    if (p.size() == 0) return 0.0;
    return p.cwiseAbs().rowwise().sum().maxCoeff();
}

Precoder::Precoder(Mat matrix, double lambda, PrecoderVariant variant)
    : matrix_(std::move(matrix)), lambda_(lambda), variant_(variant) {
    if (!matrix_.allFinite()) throw std::domain_error("precoder entries must be finite");
    bias_ = bias_offset(matrix_);
}

Precoder Precoder::active(int streams) const {
    return Precoder(matrix_.leftCols(streams), lambda_, variant_);
}

Precoder Precoder::right_multiplied(const Mat& q, PrecoderVariant variant) const {
    return Precoder(matrix_ * q, lambda_, variant);
}

Precoder svd_precoder(const Svd& channel, double lambda) {
    if (channel.rank < 1) throw RankDeficient("svd_precoder: channel has rank zero");
    const Eigen::Index n = channel.v.cols();
    Vec scale = Vec::Zero(n);
    for (int g = 0; g < channel.rank; ++g) scale(g) = std::pow(channel.sigma(g), lambda - 1.0);
    return Precoder(channel.v * scale.asDiagonal(), lambda, PrecoderVariant::Svd);
}

LambdaPlan assign_lambdas(std::span<const double> strengths, double lambda1) {
    if (strengths.empty()) throw std::invalid_argument("assign_lambdas: no users");
    LambdaPlan plan;
    plan.strengths.assign(strengths.begin(), strengths.end());
    for (double s : strengths) {
        if (!(s > 0.0)) throw std::domain_error("assign_lambdas: channel strength must be positive");
        if (s == 1.0) throw std::domain_error("assign_lambdas: channel strength of exactly 1");
    }
    plan.lambdas.push_back(lambda1);
    for (std::size_t u = 1; u < strengths.size(); ++u)
        plan.lambdas.push_back(plan.lambdas.back() * std::log(strengths[u - 1]) /
                               std::log(strengths[u]));
    plan.kappa = lambda1 * std::log(strengths[0]);
    return plan;
}

QrEnhanced qr_enhance(std::span<const Precoder> precoders, const Svd& favored_channel,
                      double favored_lambda) {
    Mat sigma_pow = favored_channel.sigma_matrix();
    for (Eigen::Index g = 0; g < favored_channel.sigma.size(); ++g)
        sigma_pow(g, g) = std::pow(favored_channel.sigma(g), favored_lambda);
    const Mat effective_t = (favored_channel.u * sigma_pow).transpose();  // M_T x M_R

    const int needed = static_cast<int>(std::min(effective_t.rows(), effective_t.cols()));
    if (favored_channel.rank < needed)
        throw RankDeficient("qr_enhance: favored user's effective channel is rank deficient");

    Eigen::HouseholderQR<Mat> qr(effective_t);
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix the sign convention so that R has a nonnegative diagonal.
    for (Eigen::Index i = 0; i < std::min(r.rows(), r.cols()); ++i) {
        if (r(i, i) < 0.0) {
            r.row(i) *= -1.0;
            q.col(i) *= -1.0;
        }
    }

    QrEnhanced out;
    out.q = q;
    for (const auto& p : precoders) out.precoders.push_back(p.right_multiplied(q, PrecoderVariant::SvdQr));
    return out;
}

Precoder zf_precoder(const Mat& h) {
    const Svd dec = svd(h);
    if (dec.rank < h.rows()) throw RankDeficient("zf_precoder: channel is not full row rank");
    Mat p = pinv(h);
    p *= std::sqrt(static_cast<double>(h.cols())) / p.norm();
    return Precoder(std::move(p), 0.0, PrecoderVariant::ZeroForcing);
}

}  // namespace vlcnoma
