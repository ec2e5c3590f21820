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

// LED nonlinearity and the adaptive Chebyshev pre-distorter.
//
// Complex samples are carried as two independent real rails (I and Q); every
// operation here acts on each rail separately.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace vlcnoma {

// Rapp soft-saturation model A(x) = x / (1 + |x / I_max|^(2p))^(1 / 2p).
struct LedModel {
    double i_max = 1.0;
    double p = 0.5;

    void validate() const;
};

double led_apply(double x, const LedModel& model);
std::complex<double> led_apply(std::complex<double> x, const LedModel& model);

// Sum_i coeffs[i] * T_i(x) using the three-term recurrence.
double chebyshev_eval(std::span<const double> coeffs, double x);
std::complex<double> chebyshev_eval(std::span<const double> coeffs, std::complex<double> x);

// Fills out[i] = T_i(x) for i < out.size().
void chebyshev_basis(double x, std::span<double> out);

struct PredistorterState {
    std::vector<double> coeffs;
    double eta = 0.00022;
    double beta = 1.0;
    std::uint64_t iteration = 0;  // accepted + rejected steps
    std::uint64_t rejected = 0;   // steps discarded by the positivity projection

    double apply(double x) const { return chebyshev_eval(coeffs, x); }
    std::complex<double> apply(std::complex<double> x) const { return chebyshev_eval(coeffs, x); }
};

// True when the expansion is strictly positive at every input rail.
bool positivity_holds(std::span<const double> coeffs, std::span<const double> inputs);

// Single-weight NLMS pre-distorter (multiplicative gain r).
struct ScalarNlmsState {
    double weight = 1.0;
    double eta = 0.00022;
    double beta = 1.0;
};

ScalarNlmsState nlms_scalar_step(const ScalarNlmsState& state, double x, double feedback);

// One projected Chebyshev-NLMS update over a batch of aligned rail samples.
// `inputs` are the pre-distorter inputs, `feedback` the observed outputs
// referred to the same domain. The candidate is kept only if the expansion
// stays positive on every input of the batch, and on `guard` when given.
PredistorterState cheb_nlms_step(const PredistorterState& state, std::span<const double> inputs,
                                 std::span<const double> feedback,
                                 std::span<const double> guard = {});

class InfeasibleInit : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Draws coefficients uniformly from [0, 1]^n_cheb until the expansion is
// positive on the probe batch. Throws InfeasibleInit after max_draws.
PredistorterState find_feasible_init(std::size_t n_cheb, double eta, double beta,
                                     std::span<const double> probe, std::mt19937_64& rng,
                                     std::size_t max_draws = 10000);

// Closed loop seen by the pre-distorter: maps LED input rails to feedback
// rails aligned with (and in the same units as) the pre-distorter inputs.
using ClosedLoopPlant =
    std::function<void(std::span<const double> led_input, std::span<double> feedback)>;

struct TrainOptions {
    std::size_t window = 1000;  // samples per MSE window
    double smoothing = 0.1;     // EMA weight of the newest window
    std::size_t epochs = 1;     // passes over the drive stream
    std::vector<double> guard;  // extra points the expansion must stay positive on
};

struct MseTrace {
    std::size_t window = 0;
    std::vector<double> window_mse;  // mean of (beta x - feedback)^2 per window
    std::vector<double> smoothed;    // exponential moving average of window_mse
};

struct TrainResult {
    PredistorterState state;
    MseTrace trace;
};

// Runs cheb_nlms_step over `drive`, consumed `batch` rails at a time.
TrainResult train_predistorter(const ClosedLoopPlant& plant, std::span<const double> drive,
                               std::size_t batch, PredistorterState state,
                               const TrainOptions& options = {});

struct BussgangStats {
    double alpha = 0.0;
    double distortion_var = 0.0;
    // E[delta x*] / sqrt(E|delta|^2 E|x|^2)
    double cross_corr = 0.0;
};

BussgangStats estimate_bussgang(std::span<const double> x, std::span<const double> y);
BussgangStats estimate_bussgang(std::span<const std::complex<double>> x,
                                std::span<const std::complex<double>> y);

// Applies a fixed correlation gain to a new stream and reports the residual.
BussgangStats bussgang_residual(std::span<const double> x, std::span<const double> y,
                                double alpha);

}  // namespace vlcnoma
