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

#include "vlcnoma/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <future>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace vlcnoma {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Proposed: return "proposed";
        case Variant::Grpa: return "grpa";
        case Variant::ZeroForcing: return "zf";
        case Variant::LinearIdeal: return "linear-ideal";
    }
    return "unknown";
}

Variant parse_variant(std::string_view tag) {
    if (tag == "proposed") return Variant::Proposed;
    if (tag == "grpa") return Variant::Grpa;
    if (tag == "zf") return Variant::ZeroForcing;
    if (tag == "linear-ideal") return Variant::LinearIdeal;
    throw std::invalid_argument("unknown variant '" + std::string(tag) + "'");
}

bool SimConfig::operator==(const SimConfig& o) const {
    auto same_room = room.room_dims == o.room.room_dims &&
                     room.led_positions == o.room.led_positions &&
                     room.led_height == o.room.led_height && room.half_angle == o.room.half_angle &&
                     room.ceiling_center == o.room.ceiling_center;
    if (!same_room || users.size() != o.users.size()) return false;
    for (std::size_t u = 0; u < users.size(); ++u)
        if (users[u].pd_positions != o.users[u].pd_positions ||
            users[u].pd_area != o.users[u].pd_area || users[u].fov != o.users[u].fov)
            return false;
    return num_users == o.num_users && modulation_order == o.modulation_order &&
           qos_rates == o.qos_rates && sum_rate_qos_rates == o.sum_rate_qos_rates &&
           snr_db == o.snr_db && sigma_gamma2 == o.sigma_gamma2 && eta == o.eta &&
           beta == o.beta && n_cheb == o.n_cheb && lambda1 == o.lambda1 &&
           symbols_per_point == o.symbols_per_point && shards == o.shards && seed == o.seed &&
           variants == o.variants && led.i_max == o.led.i_max && led.p == o.led.p &&
           drive_peak == o.drive_peak && bias_headroom == o.bias_headroom && training_fraction == o.training_fraction &&
           training_epochs == o.training_epochs &&
           sum_rate_snr_db == o.sum_rate_snr_db && theorem1_kappas == o.theorem1_kappas &&
           theorem1_samples == o.theorem1_samples && threads == o.threads;
}

SimConfig default_config() {
    constexpr double deg = std::numbers::pi / 180.0;
    SimConfig c;
    c.room.room_dims = {5.0, 5.0, 3.0};
    c.room.led_positions = {{0.2, 0.0, -0.75}, {-0.2, 0.0, -0.75}};
    c.room.led_height = 2.25;
    c.room.half_angle = 70.0 * deg;
    c.room.ceiling_center = {0.0, 0.0, 0.0};
    const double xs[4] = {0.1, -0.1, -0.35, 0.35};
    const double ys[4] = {0.1, 0.1, 0.35, 0.35};
    for (int u = 0; u < 4; ++u) {
        UserGeometry g;
        g.pd_positions = {{xs[u], ys[u], -3.0}, {xs[u], -ys[u], -3.0}};
        g.pd_area = 1e-4;
        g.fov = 60.0 * deg;
        c.users.push_back(g);
    }
    for (int s = 0; s <= 30; s += 3) c.snr_db.push_back(s);
    c.sigma_gamma2 = {0.0, sigma_gamma2_from_db(33.0), sigma_gamma2_from_db(36.0)};
    return c;
}

void validate(const SimConfig& c) {
    auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
    if (c.users.empty()) fail("at least one user geometry is required");
    if (c.num_users < 1 || c.num_users > static_cast<int>(c.users.size()))
        fail("num_users must lie in [1, number of user geometries]");
    if (c.modulation_order != 4 && c.modulation_order != 16 && c.modulation_order != 64)
        fail("modulation_order must be 4, 16 or 64");
    if (static_cast<int>(c.qos_rates.size()) < c.num_users)
        fail("qos_rates needs one entry per user");
    for (double r : c.qos_rates)
        if (!(r >= 0.0) || !std::isfinite(r)) fail("qos_rates must be finite and nonnegative");
    if (c.sum_rate_qos_rates.empty()) fail("sum_rate_qos_rates must not be empty");
    if (c.sum_rate_qos_rates.size() > c.users.size())
        fail("sum_rate_qos_rates has more entries than user geometries");
    for (double r : c.sum_rate_qos_rates)
        if (!(r >= 0.0) || !std::isfinite(r)) fail("sum_rate_qos_rates must be finite and nonnegative");
    if (c.snr_db.empty()) fail("snr_db must not be empty");
    for (std::size_t i = 0; i < c.snr_db.size(); ++i) {
        if (!std::isfinite(c.snr_db[i])) fail("snr_db entries must be finite");
        if (i > 0 && !(c.snr_db[i] > c.snr_db[i - 1])) fail("snr_db must be strictly increasing");
    }
    if (c.sigma_gamma2.empty()) fail("sigma_gamma2 must not be empty");
    for (double s : c.sigma_gamma2)
        if (!(s >= 0.0) || !std::isfinite(s)) fail("sigma_gamma2 entries must be finite and nonnegative");
    if (!(c.eta > 0.0) || !std::isfinite(c.eta)) fail("eta must be positive");
    if (!(c.beta > 0.0) || !std::isfinite(c.beta)) fail("beta must be positive");
    if (c.n_cheb < 2 || c.n_cheb > 32) fail("n_cheb must lie in [2, 32]");
    if (!(c.lambda1 != 0.0) || !std::isfinite(c.lambda1)) fail("lambda1 must be finite and nonzero");
    if (c.symbols_per_point < 10000) fail("symbols_per_point must be at least 1e4");
    if (c.shards < 1) fail("shards must be at least 1");
    if (c.variants.empty()) fail("variants must not be empty");
    if (!(c.led.i_max > 0.0) || !(c.led.p > 0.0)) fail("led i_max and p must be positive");
    if (!(c.drive_peak > 0.0 && c.drive_peak < c.led.i_max))
        fail("drive_peak must lie in (0, led.i_max)");
    if (!(c.training_fraction > 0.0 && c.training_fraction < 1.0))
        fail("training_fraction must lie in (0, 1)");
    if (!(c.bias_headroom >= 0.0) || !std::isfinite(c.bias_headroom)) fail("bias_headroom must be nonnegative");
    if (c.training_epochs < 1) fail("training_epochs must be at least 1");
    if (!std::isfinite(c.sum_rate_snr_db)) fail("sum_rate_snr_db must be finite");
    if (c.theorem1_kappas.empty()) fail("theorem1_kappas must not be empty");
    for (double k : c.theorem1_kappas)
        if (!(k > 0.0) || !std::isfinite(k)) fail("theorem1_kappas must be positive");
    if (c.theorem1_samples < 2) fail("theorem1_samples must be at least 2");

    c.room.validate();
    for (const auto& u : c.users) u.validate(c.room);
}

WilsonInterval wilson_interval(std::uint64_t errors, std::uint64_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    // The endpoints are exact at p = 0 and p = 1; keep rounding out of them.
    return {errors == 0 ? 0.0 : std::max(0.0, centre - half),
            errors == trials ? 1.0 : std::min(1.0, centre + half)};
}

std::vector<ChannelMatrix> scaled_channels(const SimConfig& config, int count) {
    std::vector<ChannelMatrix> out;
    for (int u = 0; u < count; ++u)
        out.push_back(build_channel_matrix(config.room, config.users[static_cast<std::size_t>(u)], u + 1));
    const double scale = unit_power_scale(out.front().gains);
    for (auto& c : out) c.gains *= scale;
    return out;
}

namespace {

constexpr std::uint64_t kReferenceTag = 0x7265660aULL;
constexpr std::uint64_t kShardTag = 0x73686172ULL;
constexpr std::size_t kGuardPoints = 41;

std::uint64_t point_seed(std::uint64_t seed, double snr_db) {
    return derive_seed(seed, std::bit_cast<std::uint64_t>(snr_db));
}

// Users sorted by descending QoS, ties by id. This is also the allocation order.
std::vector<int> plan_order(std::span<const double> qos) {
    std::vector<int> idx(qos.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return qos[a] > qos[b]; });
    return idx;
}

struct Link {
    int user_id = 0;
    Mat h;
    Mat h_est;
    Svd svd_est;
    Precoder precoder;
    Mat eq;         // (H_hat P_hat)^+
    Vec rx_offset;  // beta g b H_hat 1
    double sigma_v2 = 0.0;
    NoiseBudget budget;
};

struct Setup {
    std::vector<Link> links;      // plan order
    std::vector<UserPlan> plans;  // plan order
    int streams = 1;
    double bias = 0.0;
    double gain = 1.0;
    double drive_lo = 0.0;  // drive range, mapped onto [-1, 1] for the pre-distorter
    double drive_hi = 1.0;

    double to_unit(double d) const { return (2.0 * d - drive_lo - drive_hi) / (drive_hi - drive_lo); }
};

struct Transmit {
    std::vector<double> lambdas;  // plan order
    std::vector<double> powers;   // plan order, empty before allocation
};

std::vector<double> lambda_plan(const SimConfig& config, std::span<const double> strengths,
                                std::span<const double> qos, Variant variant) {
    std::vector<double> lambdas(strengths.size(), 1.0);
    if (variant == Variant::ZeroForcing) return lambdas;
    // Recursion runs from the lowest QoS upward.
    std::vector<std::size_t> asc(strengths.size());
    std::iota(asc.begin(), asc.end(), 0);
    std::stable_sort(asc.begin(), asc.end(), [&](std::size_t a, std::size_t b) { return qos[a] < qos[b]; });
    std::vector<double> s;
    for (auto i : asc) s.push_back(strengths[i]);
    const auto plan = assign_lambdas(s, config.lambda1);
    for (std::size_t k = 0; k < asc.size(); ++k) lambdas[asc[k]] = plan.lambdas[k];
    return lambdas;
}

// Estimation, precoding and (optionally) allocation for one ensemble member.
Setup build_setup(const SimConfig& config, const std::vector<ChannelMatrix>& channels,
                  std::span<const double> qos, double snr_db, double sigma_gamma2,
                  Variant variant, Transmit& tx, std::mt19937_64& rng) {
    const auto n_users = channels.size();
    Setup st;
    st.streams = std::numeric_limits<int>::max();
    for (const auto& c : channels) st.streams = std::min(st.streams, svd(c.gains).rank);
    if (st.streams < 1) throw RankDeficient("a user channel has rank zero");

    std::vector<double> strengths;
    for (const auto& c : channels) {
        Link l;
        l.user_id = c.user_id;
        l.h = c.gains;
        l.h_est = perturb_channel(c.gains, sigma_gamma2, rng).estimate;
        l.svd_est = svd(l.h_est);
        strengths.push_back(l.svd_est.sigma.squaredNorm());
        st.links.push_back(std::move(l));
    }
    if (tx.lambdas.empty()) tx.lambdas = lambda_plan(config, strengths, qos, variant);

    const double snr = std::pow(10.0, snr_db / 10.0);
    std::vector<double> sigma_o2(n_users);
    for (std::size_t u = 0; u < n_users; ++u) {
        Link& l = st.links[u];
        if (variant == Variant::ZeroForcing) {
            const Mat reduced = l.svd_est.u.leftCols(st.streams).transpose() * l.h_est;
            l.precoder = zf_precoder(reduced);
        } else {
            l.precoder = svd_precoder(l.svd_est, tx.lambdas[u]).active(st.streams);
        }
        const Mat& p = l.precoder.matrix();
        // Noise referred to unit drive gain; scaled by (beta g)^2 once g is known.
        const double sv = (l.h * p).squaredNorm() / (static_cast<double>(l.h.rows()) * snr);
        l.budget = noise_budget(l.h_est, p, config.eta, sv, 1.0);
        sigma_o2[u] = l.budget.sigma_o2;
    }

    if (tx.powers.empty()) {
        std::vector<UserPlan> req;
        for (std::size_t u = 0; u < n_users; ++u) {
            auto p = make_user_plan(st.links[u].user_id, qos[u]);
            p.lambda = tx.lambdas[u];
            req.push_back(p);
        }
        if (variant == Variant::Grpa) {
            const auto g = grpa_allocate(strengths);
            for (std::size_t u = 0; u < n_users; ++u) tx.powers.push_back(g[u]);
        } else {
            const auto alloc = allocate_power(req, sigma_o2);
            if (!alloc.feasible()) {
                std::string msg = "power allocation infeasible:";
                for (const auto& r : alloc.rejected)
                    msg += " user " + std::to_string(r.user_id) + " (" + r.reason + ")";
                throw std::domain_error(msg);
            }
            for (const auto& p : alloc.admitted) tx.powers.push_back(p.power);
        }
    }

    for (std::size_t u = 0; u < n_users; ++u) {
        auto p = make_user_plan(st.links[u].user_id, qos[u]);
        p.lambda = tx.lambdas[u];
        p.power = tx.powers[u];
        p.precoder = st.links[u].precoder;
        st.plans.push_back(std::move(p));
    }
    assign_sic_layers(st.plans);

    const Constellation qam(config.modulation_order);
    const double rail_peak = (qam.side() - 1) * qam.rail_scale();
    double x_peak = 0.0;
    for (double p : tx.powers) x_peak += std::sqrt(p) * rail_peak;
    double swing = 0.0;  // largest |P x| over users and symbols
    for (const auto& l : st.links) swing = std::max(swing, l.precoder.bias() * x_peak);
    if (!(swing > 0.0)) throw std::domain_error("transmit bias vanished");
    st.bias = swing * (1.0 + config.bias_headroom);
    st.gain = config.drive_peak / (st.bias + swing);
    st.drive_lo = st.gain * (st.bias - swing);
    st.drive_hi = config.drive_peak;

    const double bg = config.beta * st.gain;
    for (auto& l : st.links) {
        l.eq = pinv(l.h_est * l.precoder.matrix());
        l.rx_offset = bg * st.bias * l.h_est * Vec::Ones(l.h_est.cols());
        l.sigma_v2 = bg * bg * l.budget.sigma_v2;
    }
    return st;
}

// Bias, pre-distort, LED, channel, noise, bias removal and equalization for
// one real rail of one user. `x` holds the rail of each stream.
class RailLink {
  public:
    RailLink(const Setup& st, const Link& link, const SimConfig& config,
             const PredistorterState* pd, bool ideal)
        : st_(st), link_(link), config_(config), pd_(pd), ideal_(ideal),
          gain_(st.gain), bias_(st.bias), bg_(config.beta * st.gain),
          noise_sd_(std::sqrt(link.sigma_v2 / 2.0)),
          drive_(link.h.cols()), led_(link.h.cols()), y_(link.h.rows()), l_(link.eq.rows()) {}

    void drive(const Vec& x, Vec& d) const {
        d.noalias() = link_.precoder.matrix() * x;
        d = (d.array() + bias_) * gain_;
    }

    // LED input -> equalized rail estimate.
    const Vec& receive(const Vec& led_input, std::mt19937_64& rng) {
        for (Eigen::Index j = 0; j < led_input.size(); ++j)
            led_(j) = ideal_ ? config_.beta * led_input(j) : led_apply(led_input(j), config_.led);
        y_.noalias() = link_.h * led_;
        for (Eigen::Index i = 0; i < y_.size(); ++i) y_(i) += noise_sd_ * gauss_(rng) - link_.rx_offset(i);
        l_.noalias() = link_.eq * y_;
        l_ /= bg_;
        return l_;
    }

    const Vec& transmit(const Vec& x, std::mt19937_64& rng) {
        drive(x, drive_);
        if (pd_ && !ideal_)
            for (Eigen::Index j = 0; j < drive_.size(); ++j) drive_(j) = pd_->apply(st_.to_unit(drive_(j)));
        return receive(drive_, rng);
    }

  private:
    const Setup& st_;
    const Link& link_;
    const SimConfig& config_;
    const PredistorterState* pd_;
    bool ideal_;
    double gain_;
    double bias_;
    double bg_;
    double noise_sd_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
    Vec drive_;
    Vec led_;
    Vec y_;
    Vec l_;
};

struct Counts {
    std::vector<std::uint64_t> errors;
    std::vector<std::uint64_t> bits;
};

void draw_symbols(const Setup& st, const Constellation& qam, std::mt19937_64& rng,
                  std::vector<std::vector<int>>& labels, Eigen::VectorXcd& x) {
    std::uniform_int_distribution<int> pick(0, qam.order() - 1);
    x.setZero();
    for (std::size_t u = 0; u < st.plans.size(); ++u) {
        const double a = std::sqrt(st.plans[u].power);
        for (int s = 0; s < st.streams; ++s) {
            labels[u][static_cast<std::size_t>(s)] = pick(rng);
            x(s) += a * qam.point(labels[u][static_cast<std::size_t>(s)]);
        }
    }
}

Counts simulate(const SimConfig& config, const Setup& st, const PredistorterState* pd, bool ideal,
                std::uint64_t symbols, std::mt19937_64& rng) {
    const Constellation qam(config.modulation_order);
    const auto n_users = st.plans.size();
    const auto order = sic_order(st.plans);
    std::vector<RailLink> rails;
    for (const auto& l : st.links) rails.emplace_back(st, l, config, pd, ideal);

    Counts c{std::vector<std::uint64_t>(n_users, 0), std::vector<std::uint64_t>(n_users, 0)};
    std::vector<std::vector<int>> tx(n_users, std::vector<int>(static_cast<std::size_t>(st.streams)));
    std::vector<int> rx(n_users);
    Eigen::VectorXcd x(st.streams);
    Vec xr(st.streams), xi(st.streams);
    const auto bits_per_use = static_cast<std::uint64_t>(qam.bits_per_symbol() * st.streams);

    for (std::uint64_t k = 0; k < symbols; ++k) {
        draw_symbols(st, qam, rng, tx, x);
        xr = x.real();
        xi = x.imag();
        for (std::size_t v = 0; v < n_users; ++v) {
            const Vec lr = rails[v].transmit(xr, rng);
            const Vec& li = rails[v].transmit(xi, rng);
            for (int s = 0; s < st.streams; ++s) {
                sic_labels({lr(s), li(s)}, st.plans, order, qam, rx);
                c.errors[v] += static_cast<std::uint64_t>(
                    std::popcount(static_cast<unsigned>(rx[v] ^ tx[v][static_cast<std::size_t>(s)])));
            }
            c.bits[v] += bits_per_use;
        }
    }
    return c;
}

TrainResult train_on(const SimConfig& config, const Setup& st, std::uint64_t symbols,
                     std::mt19937_64& rng) {
    const Constellation qam(config.modulation_order);
    // Feedback comes from the highest-QoS user, first in plan order.
    const Link& fb = st.links.front();
    RailLink rail(st, fb, config, nullptr, false);
    const auto n_t = fb.h.cols();

    std::vector<std::vector<int>> labels(st.plans.size(), std::vector<int>(static_cast<std::size_t>(st.streams)));
    Eigen::VectorXcd x(st.streams);
    std::vector<double> drive;
    drive.reserve(static_cast<std::size_t>(symbols * 2 * static_cast<std::uint64_t>(n_t)));
    Vec d(n_t);
    for (std::uint64_t k = 0; k < symbols; ++k) {
        draw_symbols(st, qam, rng, labels, x);
        for (const Vec& rail_x : {Vec(x.real()), Vec(x.imag())}) {
            rail.drive(rail_x, d);
            for (Eigen::Index j = 0; j < n_t; ++j) drive.push_back(st.to_unit(d(j)));
        }
    }

    // A rail only visits a handful of drive levels, which leaves some Chebyshev
    // directions unobserved. Keeping the expansion positive across the whole
    // unit domain stops them from wandering into negative LED input.
    std::vector<double> guard(kGuardPoints);
    for (std::size_t i = 0; i < guard.size(); ++i)
        guard[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(guard.size() - 1);
    const std::size_t probe_len = std::min<std::size_t>(drive.size(), 4096);
    std::vector<double> probe(drive.begin(), drive.begin() + static_cast<std::ptrdiff_t>(probe_len));
    probe.insert(probe.end(), guard.begin(), guard.end());
    auto init = find_feasible_init(static_cast<std::size_t>(config.n_cheb), config.eta, config.beta, probe, rng);

    const Mat& p = fb.precoder.matrix();
    Vec led(n_t);
    ClosedLoopPlant plant = [&](std::span<const double> in, std::span<double> out) {
        for (Eigen::Index j = 0; j < n_t; ++j) led(j) = in[static_cast<std::size_t>(j)];
        const Vec& l = rail.receive(led, rng);
        // Feedback in the drive domain, beta g (P l + b), then mapped like the drive.
        const Vec o = st.gain * ((p * l).array() + st.bias).matrix();
        for (Eigen::Index j = 0; j < n_t; ++j) out[static_cast<std::size_t>(j)] = config.beta * st.to_unit(o(j));
    };
    TrainOptions opts;
    opts.epochs = static_cast<std::size_t>(config.training_epochs);
    return train_predistorter(plant, drive, static_cast<std::size_t>(n_t), std::move(init), opts);
}

std::vector<double> qos_for(const SimConfig& config, int count) {
    return {config.qos_rates.begin(), config.qos_rates.begin() + count};
}

// Channels and QoS targets in plan order.
void ordered_inputs(const SimConfig& config, std::vector<ChannelMatrix>& channels,
                    std::vector<double>& qos) {
    const auto all = scaled_channels(config, config.num_users);
    const auto q = qos_for(config, config.num_users);
    channels.clear();
    qos.clear();
    for (int i : plan_order(q)) {
        channels.push_back(all[static_cast<std::size_t>(i)]);
        qos.push_back(q[static_cast<std::size_t>(i)]);
    }
}

std::uint64_t training_symbols(const SimConfig& config) {
    return static_cast<std::uint64_t>(
        std::llround(config.training_fraction * static_cast<double>(config.symbols_per_point)));
}

}  // namespace

TrainResult train_reference(const SimConfig& config, double snr_db, double sigma_gamma2,
                            std::uint64_t seed) {
    std::vector<ChannelMatrix> channels;
    std::vector<double> qos;
    ordered_inputs(config, channels, qos);
    std::mt19937_64 rng(derive_seed(point_seed(seed, snr_db), kReferenceTag));
    Transmit tx;
    const Setup st = build_setup(config, channels, qos, snr_db, sigma_gamma2, Variant::Proposed, tx, rng);
    return train_on(config, st, training_symbols(config), rng);
}

PointResult run_point(const SimConfig& config, double snr_db, double sigma_gamma2, Variant variant,
                      std::uint64_t seed) {
    PointResult res;
    res.snr_db = snr_db;
    res.sigma_gamma2 = sigma_gamma2;
    res.variant = variant;

    std::vector<ChannelMatrix> channels;
    std::vector<double> qos;
    ordered_inputs(config, channels, qos);
    const std::uint64_t base = point_seed(seed, snr_db);
    const bool ideal = variant == Variant::LinearIdeal;

    Transmit tx;
    Setup ref;
    Setup exact;  // perfect-CSI twin, source of the analytic columns
    try {
        std::mt19937_64 rng(derive_seed(base, kReferenceTag));
        if (sigma_gamma2 > 0.0) {
            Transmit exact_tx;
            std::mt19937_64 unused(0);
            exact = build_setup(config, channels, qos, snr_db, 0.0, variant, exact_tx, unused);
        }
        // Fixes lambdas and powers for every ensemble member.
        ref = build_setup(config, channels, qos, snr_db, sigma_gamma2, variant, tx, rng);
        if (sigma_gamma2 == 0.0) exact = ref;
    } catch (const std::exception& e) {
        res.notice = e.what();
        return res;
    }

    const std::uint64_t measure = config.symbols_per_point - training_symbols(config);
    const std::uint64_t shards = std::min<std::uint64_t>(config.shards, measure);
    std::uint64_t workers = config.threads ? config.threads : std::thread::hardware_concurrency();
    workers = std::clamp<std::uint64_t>(workers, 1, shards);

    std::vector<Counts> per_shard(shards);
    std::vector<std::string> shard_error(shards);
    // Each shard is an ensemble member: its own estimate and its own training
    // run, then its slice of the measurement symbols.
    auto run_shard = [&](std::uint64_t s) {
        try {
            std::mt19937_64 rng(derive_seed(base, kShardTag, s));
            Transmit shard_tx = tx;
            const Setup st = build_setup(config, channels, qos, snr_db, sigma_gamma2, variant, shard_tx, rng);
            // Every variant draws the training stream so later streams line up.
            const auto trained = train_on(config, st, training_symbols(config), rng);
            const std::uint64_t n = measure / shards + (s < measure % shards ? 1 : 0);
            per_shard[s] = simulate(config, st, &trained.state, ideal, n, rng);
        } catch (const std::exception& e) {
            shard_error[s] = e.what();
        }
    };
    if (workers == 1) {
        for (std::uint64_t s = 0; s < shards; ++s) run_shard(s);
    } else {
        std::vector<std::thread> pool;
        for (std::uint64_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::uint64_t s = w; s < shards; s += workers) run_shard(s);
            });
        for (auto& t : pool) t.join();
    }
    for (const auto& e : shard_error)
        if (!e.empty()) {
            res.notice = e;
            return res;
        }

    const Constellation qam(config.modulation_order);
    std::vector<double> sic_powers;
    for (auto i : sic_order(exact.plans)) sic_powers.push_back(exact.plans[i].power);
    const MuLadder ladder = mu_ladder(qam, sic_powers);
    double energy = 0.0;
    for (const auto& p : exact.plans) energy += p.power;
    energy *= static_cast<double>(exact.streams);

    for (std::size_t u = 0; u < ref.plans.size(); ++u) {
        const Link& l = ref.links[u];
        UserPointResult r;
        r.user_id = l.user_id;
        r.qos_rate = ref.plans[u].qos_rate;
        r.power = ref.plans[u].power;
        for (const auto& c : per_shard) {
            r.bit_errors += c.errors[u];
            r.bits += c.bits[u];
        }
        r.ber = static_cast<double>(r.bit_errors) / static_cast<double>(r.bits);
        const auto ci = wilson_interval(r.bit_errors, r.bits);
        r.ci_lo = ci.lo;
        r.ci_hi = ci.hi;
        // Analytic side sees the true channel plus the error term alone, so it
        // moves with sigma_gamma2 and not with this point's particular draw.
        const Link& e = exact.links[u];
        const auto est = make_est_error_budget(e.svd_est.sigma, e.svd_est.sigma, exact.streams,
                                               sigma_gamma2, exact.plans[u].lambda, energy);
        r.sigma_o2 = sigma_o_prime(e.budget.sigma_o2, est);
        r.analytic = ber_qam(ber_sqrt_m(ladder, r.sigma_o2));
        r.sinr = sinr(exact.plans, r.sigma_o2, r.user_id);
        r.rate = std::log2(1.0 + r.sinr);
        res.users.push_back(r);
    }
    std::sort(res.users.begin(), res.users.end(),
              [](const auto& a, const auto& b) { return a.user_id < b.user_id; });
    res.ok = true;
    return res;
}

BerSweep sweep(const SimConfig& config) {
    BerSweep out;
    for (Variant v : config.variants)
        for (double sg : config.sigma_gamma2)
            for (double snr : config.snr_db) out.points.push_back(run_point(config, snr, sg, v, config.seed));
    return out;
}

RateCurve sum_rate_experiment(const SimConfig& config) {
    RateCurve curve;
    const int max_users = static_cast<int>(config.sum_rate_qos_rates.size());
    const auto all = scaled_channels(config, max_users);
    const double snr = std::pow(10.0, config.sum_rate_snr_db / 10.0);
    int streams = std::numeric_limits<int>::max();
    for (const auto& c : all) streams = std::min(streams, svd(c.gains).rank);

    for (Variant variant : {Variant::Proposed, Variant::Grpa, Variant::ZeroForcing}) {
        for (int n = 1; n <= max_users; ++n) {
            std::vector<double> qos(config.sum_rate_qos_rates.begin(), config.sum_rate_qos_rates.begin() + n);
            std::vector<int> order = plan_order(qos);
            std::vector<double> q, strengths;
            std::vector<Svd> svds;
            for (int i : order) {
                q.push_back(qos[static_cast<std::size_t>(i)]);
                svds.push_back(svd(all[static_cast<std::size_t>(i)].gains));
                strengths.push_back(svds.back().sigma.squaredNorm());
            }
            RateRow row;
            row.users = n;
            row.variant = variant;
            try {
                const auto lambdas = lambda_plan(config, strengths, q, variant);
                std::vector<UserPlan> plans;
                std::vector<double> sigma_o2;
                for (std::size_t u = 0; u < q.size(); ++u) {
                    const Mat& h = all[static_cast<std::size_t>(order[u])].gains;
                    Precoder p = variant == Variant::ZeroForcing
                                     ? zf_precoder(svds[u].u.leftCols(streams).transpose() * h)
                                     : svd_precoder(svds[u], lambdas[u]).active(streams);
                    const double sv = (h * p.matrix()).squaredNorm() / (static_cast<double>(h.rows()) * snr);
                    sigma_o2.push_back(noise_budget(h, p.matrix(), config.eta, sv, 1.0).sigma_o2);
                    auto plan = make_user_plan(order[u] + 1, q[u]);
                    plan.lambda = lambdas[u];
                    plan.precoder = p;
                    plans.push_back(std::move(plan));
                }
                if (variant == Variant::Grpa) {
                    const auto g = grpa_allocate(strengths);
                    // Layers follow the QoS order, as for the proposed scheme.
                    for (std::size_t u = 0; u < plans.size(); ++u) {
                        plans[u].power = g[u];
                        plans[u].sic_layer = static_cast<int>(u);
                    }
                    const auto rep = sum_rate(plans, sigma_o2);
                    row.sum_rate = rep.sum;
                    row.feasible = std::none_of(rep.outage.begin(), rep.outage.end(), [](bool b) { return b; });
                } else {
                    const auto alloc = allocate_power(plans, sigma_o2);
                    std::vector<double> admitted_noise(sigma_o2.begin(),
                                                       sigma_o2.begin() + static_cast<long>(alloc.admitted.size()));
                    row.sum_rate = sum_rate(alloc.admitted, admitted_noise).sum;
                    row.feasible = alloc.feasible();
                    row.rejected = alloc.rejected;
                    if (variant == Variant::Proposed && !row.feasible && !curve.first_infeasible)
                        curve.first_infeasible = n;
                }
            } catch (const std::exception& e) {
                row.feasible = false;
                row.rejected.push_back({0, e.what()});
            }
            curve.rows.push_back(std::move(row));
        }
    }
    return curve;
}

std::vector<Theorem1Row> theorem1_experiment(const SimConfig& config) {
    const int n = static_cast<int>(config.users.size());
    const auto all = scaled_channels(config, n);
    std::vector<Theorem1Row> rows;
    for (int b = 0; b < n; ++b) {
        for (int bp = b + 1; bp < n; ++bp) {
            const Svd sb = svd(all[static_cast<std::size_t>(b)].gains);
            const Svd sbp = svd(all[static_cast<std::size_t>(bp)].gains);
            const double s[2] = {sb.sigma.squaredNorm(), sbp.sigma.squaredNorm()};
            double lb = config.lambda1;
            double lbp = config.lambda1;
            if (s[0] != s[1]) {
                const auto plan = assign_lambdas(s, config.lambda1);
                lb = plan.lambdas[0];
                lbp = plan.lambdas[1];
            }
            const int rank = std::min(sb.rank, sbp.rank);
            for (std::size_t k = 0; k < config.theorem1_kappas.size(); ++k) {
                Theorem1Case c;
                c.sigma_b = sb.sigma.head(rank);
                c.sigma_b_prime = sbp.sigma.head(rank);
                c.lambda_b = lb;
                c.lambda_b_prime = lbp;
                c.kappa = config.theorem1_kappas[k];
                std::mt19937_64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(b),
                                                static_cast<std::uint64_t>(bp), k));
                rows.push_back({b + 1, bp + 1, c.kappa, verify_theorem1(c, config.theorem1_samples, rng)});
            }
        }
    }
    return rows;
}

}  // namespace vlcnoma
