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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <type_traits>

namespace vlcnoma {

void LedModel::validate() const {
    if (!(i_max > 0.0)) throw std::invalid_argument("LED saturation level must be positive");
    if (!(p > 0.0)) throw std::invalid_argument("LED knee parameter must be positive");
}

double led_apply(double x, const LedModel& model) {
    const double two_p = 2.0 * model.p;
    const double ratio = std::abs(x) / model.i_max;
    if (two_p == 1.0) return x / (1.0 + ratio);
    return x / std::pow(1.0 + std::pow(ratio, two_p), 1.0 / two_p);
}

std::complex<double> led_apply(std::complex<double> x, const LedModel& model) {
    return {led_apply(x.real(), model), led_apply(x.imag(), model)};
}

double chebyshev_eval(std::span<const double> coeffs, double x) {
    if (coeffs.empty()) return 0.0;
    double prev = 1.0;
    double acc = coeffs[0];
    if (coeffs.size() == 1) return acc;
    double cur = x;
    acc += coeffs[1] * cur;
    for (std::size_t i = 2; i < coeffs.size(); ++i) {
        const double next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
        acc += coeffs[i] * cur;
    }
    return acc;
}

std::complex<double> chebyshev_eval(std::span<const double> coeffs, std::complex<double> x) {
    return {chebyshev_eval(coeffs, x.real()), chebyshev_eval(coeffs, x.imag())};
}

void chebyshev_basis(double x, std::span<double> out) {
    if (out.empty()) return;
    out[0] = 1.0;
    if (out.size() > 1) out[1] = x;
    for (std::size_t i = 2; i < out.size(); ++i) out[i] = 2.0 * x * out[i - 1] - out[i - 2];
}

bool positivity_holds(std::span<const double> coeffs, std::span<const double> inputs) {
    return std::all_of(inputs.begin(), inputs.end(),
                       [&](double x) { return chebyshev_eval(coeffs, x) > 0.0; });
}

ScalarNlmsState nlms_scalar_step(const ScalarNlmsState& state, double x, double feedback) {
    if (x == 0.0) return state;
    ScalarNlmsState next = state;
    const double e = state.beta * x - feedback;
    next.weight += state.eta / (x * x) * e * x;
    return next;
}

PredistorterState cheb_nlms_step(const PredistorterState& state, std::span<const double> inputs,
                                 std::span<const double> feedback, std::span<const double> guard) {
    if (inputs.size() != feedback.size())
        throw std::invalid_argument("cheb_nlms_step: inputs and feedback must be aligned");
    const std::size_t n = state.coeffs.size();
    std::vector<double> candidate = state.coeffs;
    std::vector<double> basis(n);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        chebyshev_basis(inputs[k], basis);
        const double norm = std::inner_product(basis.begin(), basis.end(), basis.begin(), 0.0);
        const double e = state.beta * inputs[k] - feedback[k];
        const double step = state.eta / norm * e;
        for (std::size_t i = 0; i < n; ++i) candidate[i] += step * basis[i];
    }

    PredistorterState next = state;
    ++next.iteration;
    if (positivity_holds(candidate, inputs) && positivity_holds(candidate, guard))
        next.coeffs = std::move(candidate);
    else
        ++next.rejected;
    return next;
}

PredistorterState find_feasible_init(std::size_t n_cheb, double eta, double beta,
                                     std::span<const double> probe, std::mt19937_64& rng,
                                     std::size_t max_draws) {
    if (n_cheb < 2) throw std::invalid_argument("pre-distorter needs at least two terms");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    PredistorterState state;
    state.eta = eta;
    state.beta = beta;
    state.coeffs.resize(n_cheb);
    for (std::size_t draw = 0; draw < max_draws; ++draw) {
        for (auto& c : state.coeffs) c = unit(rng);
        if (positivity_holds(state.coeffs, probe)) return state;
    }
    throw InfeasibleInit("no feasible pre-distorter initializer after " +
                         std::to_string(max_draws) + " random draws");
}

TrainResult train_predistorter(const ClosedLoopPlant& plant, std::span<const double> drive,
                               std::size_t batch, PredistorterState state,
                               const TrainOptions& options) {
    if (batch == 0 || drive.size() % batch != 0)
        throw std::invalid_argument("train_predistorter: drive length must be a multiple of batch");
    TrainResult result;
    result.trace.window = options.window;

    std::vector<double> led_input(batch);
    std::vector<double> feedback(batch);
    double window_sum = 0.0;
    std::size_t window_count = 0;
    auto close_window = [&] {
        const double mse = window_sum / static_cast<double>(window_count);
        auto& tr = result.trace;
        tr.window_mse.push_back(mse);
        const double prev = tr.smoothed.empty() ? mse : tr.smoothed.back();
        tr.smoothed.push_back(tr.smoothed.empty()
                                  ? mse
                                  : (1.0 - options.smoothing) * prev + options.smoothing * mse);
        window_sum = 0.0;
        window_count = 0;
    };

    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        for (std::size_t start = 0; start < drive.size(); start += batch) {
            const auto in = drive.subspan(start, batch);
            for (std::size_t k = 0; k < batch; ++k) led_input[k] = state.apply(in[k]);
            plant(led_input, feedback);
            for (std::size_t k = 0; k < batch; ++k) {
                const double e = state.beta * in[k] - feedback[k];
                window_sum += e * e;
                if (++window_count == options.window) close_window();
            }
            state = cheb_nlms_step(state, in, feedback, options.guard);
        }
    }
    if (window_count > 0) close_window();
    result.state = std::move(state);
    return result;
}

namespace {

template <typename T>
BussgangStats bussgang_impl(std::span<const T> x, std::span<const T> y,
                            const double* fixed_alpha) {
    if (x.size() != y.size()) throw std::invalid_argument("bussgang: streams must be aligned");
    if (x.empty()) throw std::invalid_argument("bussgang: empty stream");
    double px = 0.0;
    T cross{};
    for (std::size_t k = 0; k < x.size(); ++k) {
        px += std::norm(x[k]);
        if constexpr (std::is_same_v<T, double>)
            cross += y[k] * x[k];
        else
            cross += y[k] * std::conj(x[k]);
    }
    if (!(px > 0.0)) throw std::domain_error("bussgang: zero-power input stream");
    const double n = static_cast<double>(x.size());

    BussgangStats out;
    if (fixed_alpha)
        out.alpha = *fixed_alpha;
    else if constexpr (std::is_same_v<T, double>)
        out.alpha = cross / px;
    else
        out.alpha = cross.real() / px;

    T mean{};
    double pd = 0.0;
    double dx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const T d = y[k] - out.alpha * x[k];
        mean += d;
        pd += std::norm(d);
        if constexpr (std::is_same_v<T, double>)
            dx += d * x[k];
        else
            dx += (d * std::conj(x[k])).real();
    }
    mean /= n;
    out.distortion_var = std::max(0.0, pd / n - std::norm(mean));
    out.cross_corr = pd > 0.0 ? dx / std::sqrt(pd * px) : 0.0;
    return out;
}

}  // namespace

BussgangStats estimate_bussgang(std::span<const double> x, std::span<const double> y) {
    return bussgang_impl<double>(x, y, nullptr);
}

BussgangStats estimate_bussgang(std::span<const std::complex<double>> x,
                                std::span<const std::complex<double>> y) {
    return bussgang_impl<std::complex<double>>(x, y, nullptr);
}

BussgangStats bussgang_residual(std::span<const double> x, std::span<const double> y,
                                double alpha) {
    return bussgang_impl<double>(x, y, &alpha);
}

}  // namespace vlcnoma
