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

// Line-of-sight Lambertian channel model for an indoor LED array and
// per-user photodiode arrays, plus Gaussian CSI estimation error.

#include "vlcnoma/linalg.hpp"

#include <random>
#include <stdexcept>
#include <vector>

namespace vlcnoma {

using Vec3 = Eigen::Vector3d;

class GeometryError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Coordinates are relative to the ceiling center; z points up, so the floor
// sits at z = ceiling_center.z - room_dims.z.
struct RoomGeometry {
    Vec3 room_dims{5.0, 5.0, 3.0};
    std::vector<Vec3> led_positions;
    double led_height = 2.25;  // above the floor, meters
    double half_angle = 0.0;   // radians
    Vec3 ceiling_center{0.0, 0.0, 0.0};

    bool contains(const Vec3& p) const;
    void validate() const;  // throws GeometryError
};

struct UserGeometry {
    std::vector<Vec3> pd_positions;
    double pd_area = 1e-4;  // m^2
    double fov = 0.0;       // radians

    void validate(const RoomGeometry& room) const;  // throws GeometryError
};

// M_R x M_T gains; rows are photodiodes, columns are LEDs.
struct ChannelMatrix {
    int user_id = 0;
    Mat gains;
};

double lambertian_order(double half_angle);
double radiant_intensity(double kappa, double phi);

// LEDs face straight down, photodiodes straight up.
ChannelMatrix build_channel_matrix(const RoomGeometry& room, const UserGeometry& user,
                                   int user_id = 0);

struct PerturbedChannel {
    Mat estimate;
    double error_norm = 0.0;  // ||H_hat - H||_2
};

PerturbedChannel perturb_channel(const Mat& h, double sigma_gamma2, std::mt19937_64& rng);

// Maps an error level given in dB to a raw variance: X dB -> 10^(-X/10).
double sigma_gamma2_from_db(double db);

struct UserChannel {
    int user_id = 0;
    Mat h;      // true channel
    Mat h_est;  // estimated channel
    Svd svd;
    Svd svd_est;
};

struct ChannelSet {
    std::vector<UserChannel> users;
    double sigma_gamma2 = 0.0;
    double scale = 1.0;  // factor applied to the physical gains

    // Sum of squared singular values of each user's true channel.
    std::vector<double> strengths() const;
    // Smallest rank over users, i.e. the number of spatial streams every
    // user can resolve.
    int common_rank() const;
};

// Scale that gives the reference channel a unit mean squared entry.
double unit_power_scale(const Mat& reference);

// Builds a ChannelSet from raw channels. All channels are multiplied by
// `scale` before the estimation error is applied.
ChannelSet make_channel_set(const std::vector<ChannelMatrix>& channels, double scale,
                            double sigma_gamma2, std::mt19937_64& rng);

}  // namespace vlcnoma
