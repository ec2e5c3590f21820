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

#include "vlcnoma/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace vlcnoma {

bool RoomGeometry::contains(const Vec3& p) const {
    const double eps = 1e-12;
    const Vec3 lo{ceiling_center.x() - room_dims.x() / 2, ceiling_center.y() - room_dims.y() / 2,
                  ceiling_center.z() - room_dims.z()};
    const Vec3 hi{ceiling_center.x() + room_dims.x() / 2, ceiling_center.y() + room_dims.y() / 2,
                  ceiling_center.z()};
    for (int i = 0; i < 3; ++i)
        if (p(i) < lo(i) - eps || p(i) > hi(i) + eps) return false;
    return true;
}

void RoomGeometry::validate() const {
    if ((room_dims.array() <= 0.0).any()) throw GeometryError("room dimensions must be positive");
    if (!(half_angle > 0.0 && half_angle < std::numbers::pi / 2))
        throw GeometryError("LED half angle must lie in (0, pi/2)");
    if (led_positions.empty()) throw GeometryError("at least one LED is required");
    if (!(led_height > 0.0 && led_height <= room_dims.z()))
        throw GeometryError("LED height must lie in (0, room height]");
    for (const auto& p : led_positions)
        if (!contains(p)) throw GeometryError("LED position outside the room");
}

void UserGeometry::validate(const RoomGeometry& room) const {
    if (!(pd_area > 0.0)) throw GeometryError("photodiode area must be positive");
    if (!(fov > 0.0 && fov <= std::numbers::pi / 2))
        throw GeometryError("field of view must lie in (0, pi/2]");
    if (pd_positions.empty()) throw GeometryError("at least one photodiode is required");
    for (const auto& p : pd_positions)
        if (!room.contains(p)) throw GeometryError("photodiode position outside the room");
}

double lambertian_order(double half_angle) {
    if (!(half_angle > 0.0 && half_angle < std::numbers::pi / 2))
        throw std::domain_error("lambertian_order: half angle must lie in (0, pi/2)");
    return -std::log(2.0) / std::log(std::cos(half_angle));
}

double radiant_intensity(double kappa, double phi) {
    if (!(kappa > 0.0)) throw std::domain_error("radiant_intensity: order must be positive");
    if (!(phi >= 0.0 && phi <= std::numbers::pi / 2))
        throw std::domain_error("radiant_intensity: angle must lie in [0, pi/2]");
    // cos(pi/2) evaluates to ~6e-17, not 0.
    const double c = phi == std::numbers::pi / 2 ? 0.0 : std::cos(phi);
    return (kappa + 1.0) * std::pow(c, kappa) / (2.0 * std::numbers::pi);
}

ChannelMatrix build_channel_matrix(const RoomGeometry& room, const UserGeometry& user,
                                   int user_id) {
    room.validate();
    user.validate(room);
    const double kappa = lambertian_order(room.half_angle);
    const double sin_fov = std::sin(user.fov);
    const auto n_pd = static_cast<Eigen::Index>(user.pd_positions.size());
    const auto n_led = static_cast<Eigen::Index>(room.led_positions.size());

    ChannelMatrix out;
    out.user_id = user_id;
    out.gains = Mat::Zero(n_pd, n_led);
    for (Eigen::Index i = 0; i < n_pd; ++i) {
        for (Eigen::Index j = 0; j < n_led; ++j) {
            const Vec3 v = user.pd_positions[i] - room.led_positions[j];
            const double d = v.norm();
            if (d <= 0.0) throw GeometryError("photodiode coincides with an LED");
            // Both axes are vertical, so the emission and incidence angles agree.
            const double cos_angle = -v.z() / d;
            if (cos_angle <= 0.0) continue;
            const double angle = std::acos(std::min(1.0, cos_angle));
            if (!(angle < user.fov)) continue;
            out.gains(i, j) = user.pd_area / (d * d * sin_fov * sin_fov) *
                              radiant_intensity(kappa, angle) * cos_angle;
        }
    }
    return out;
}

PerturbedChannel perturb_channel(const Mat& h, double sigma_gamma2, std::mt19937_64& rng) {
    if (!(sigma_gamma2 >= 0.0))
        throw std::invalid_argument("perturb_channel: variance must be nonnegative");
    PerturbedChannel out{h, 0.0};
    if (sigma_gamma2 == 0.0) return out;
    std::normal_distribution<double> gauss(0.0, std::sqrt(sigma_gamma2));
    Mat e(h.rows(), h.cols());
    for (Eigen::Index c = 0; c < e.cols(); ++c)
        for (Eigen::Index r = 0; r < e.rows(); ++r) e(r, c) = gauss(rng);
    out.estimate = h + e;
    out.error_norm = spectral_norm(e);
    return out;
}

double sigma_gamma2_from_db(double db) { return std::pow(10.0, -db / 10.0); }

std::vector<double> ChannelSet::strengths() const {
    std::vector<double> s;
    s.reserve(users.size());
    for (const auto& u : users) s.push_back(u.svd.sigma.squaredNorm());
    return s;
}

int ChannelSet::common_rank() const {
    int r = users.empty() ? 0 : users.front().svd.rank;
    for (const auto& u : users) r = std::min(r, u.svd.rank);
    return r;
}

double unit_power_scale(const Mat& reference) {
    const double ms = reference.squaredNorm() / static_cast<double>(reference.size());
    if (!(ms > 0.0)) throw GeometryError("reference channel has no line-of-sight gain");
    return 1.0 / std::sqrt(ms);
}

ChannelSet make_channel_set(const std::vector<ChannelMatrix>& channels, double scale,
                            double sigma_gamma2, std::mt19937_64& rng) {
    ChannelSet set;
    set.sigma_gamma2 = sigma_gamma2;
    set.scale = scale;
    for (const auto& c : channels) {
        UserChannel u;
        u.user_id = c.user_id;
        u.h = c.gains * scale;
        u.h_est = perturb_channel(u.h, sigma_gamma2, rng).estimate;
        u.svd = svd(u.h);
        u.svd_est = svd(u.h_est);
        set.users.push_back(std::move(u));
    }
    return set;
}

}  // namespace vlcnoma
