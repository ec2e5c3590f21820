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

#include "vlcnoma/cli.hpp"

#include "vlcnoma/config.hpp"
#include "vlcnoma/output.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

namespace vlcnoma {

namespace {

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

void report(std::ostream& err, const std::string& kind, const std::string& message) {
    nlohmann::json j{{"error", kind}, {"message", message}};
    err << j.dump() << "\n";
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    return parts;
}

double to_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw UsageError(what + ": cannot read '" + s + "'");
    }
    if (used != s.size()) throw UsageError(what + ": cannot read '" + s + "'");
    return v;
}

}  // namespace

std::vector<double> parse_snr_range(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw UsageError("--snr expects lo:hi:step");
    const double lo = to_double(parts[0], "--snr");
    const double hi = to_double(parts[1], "--snr");
    const double step = to_double(parts[2], "--snr");
    if (!(step > 0.0) || !(hi >= lo)) throw UsageError("--snr needs lo <= hi and step > 0");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"vlcnoma: nonlinear-LED MIMO NOMA visible-light link simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::string variant_filter;
    std::string snr_range;
    bool svg = false;
    std::string powers_text;
    std::optional<int> order;
    double sigma2 = 0.01;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON configuration file");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "master seed override");
        sub->add_option("--variant", variant_filter, "variant tag(s), comma separated");
        sub->add_option("--snr", snr_range, "SNR grid lo:hi:step in dB");
    };
    auto* channel = app.add_subcommand("channel", "export channel matrices and precoders");
    auto* train = app.add_subcommand("train", "train the pre-distorter and export its coefficients");
    auto* sweep_ber = app.add_subcommand("sweep-ber", "BER against SNR sweep");
    auto* sum_rate_cmd = app.add_subcommand("sum-rate", "sum rate against the number of users");
    auto* theorem1 = app.add_subcommand("verify-theorem1", "Monte Carlo check of the rate-gap bound");
    auto* ladder = app.add_subcommand("mu-ladder", "analytic modulus ladder and BER bound");
    for (auto* sub : {channel, train, sweep_ber, sum_rate_cmd, theorem1, ladder}) common(sub);
    for (auto* sub : {sweep_ber, sum_rate_cmd}) sub->add_flag("--svg", svg, "also write SVG plots");
    ladder->add_option("--powers", powers_text, "comma separated powers in SIC order")->required();
    ladder->add_option("--order", order, "constellation size M");
    ladder->add_option("--sigma2", sigma2, "effective noise variance");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        out << app.help();
        report(err, "usage", e.what());
        return kExitUsage;
    }

    try {
        SimConfig config = config_path.empty() ? parse_config("{}") : load_config(config_path);
        if (seed) config.seed = *seed;
        if (!variant_filter.empty()) {
            config.variants.clear();
            for (const auto& t : split(variant_filter, ',')) {
                try {
                    config.variants.push_back(parse_variant(t));
                } catch (const std::invalid_argument& e) {
                    throw UsageError(e.what());
                }
            }
        }
        if (!snr_range.empty()) config.snr_db = parse_snr_range(snr_range);
        const std::filesystem::path dir(out_dir);

        if (channel->parsed()) {
            const int n = static_cast<int>(config.users.size());
            for (int u = 0; u < n; ++u) {
                std::ostringstream s;
                write_channel_csv(s, build_channel_matrix(config.room, config.users[static_cast<std::size_t>(u)], u + 1));
                write_file(dir / ("channel_u" + std::to_string(u + 1) + ".csv"), s.str());
            }
            const auto scaled = scaled_channels(config, config.num_users);
            std::vector<Svd> svds;
            std::vector<double> strengths, qos;
            for (int u = 0; u < config.num_users; ++u) {
                svds.push_back(svd(scaled[static_cast<std::size_t>(u)].gains));
                strengths.push_back(svds.back().sigma.squaredNorm());
                qos.push_back(config.qos_rates[static_cast<std::size_t>(u)]);
            }
            // Lambda recursion from the lowest QoS upward.
            std::vector<std::size_t> asc(qos.size());
            std::iota(asc.begin(), asc.end(), 0);
            std::stable_sort(asc.begin(), asc.end(), [&](auto a, auto b) { return qos[a] < qos[b]; });
            std::vector<double> s;
            for (auto i : asc) s.push_back(strengths[i]);
            const auto plan = assign_lambdas(s, config.lambda1);
            for (std::size_t k = 0; k < asc.size(); ++k) {
                const auto u = asc[k];
                std::ostringstream p;
                write_precoder_csv(p, static_cast<int>(u) + 1, svd_precoder(svds[u], plan.lambdas[k]));
                write_file(dir / ("precoder_u" + std::to_string(u + 1) + ".csv"), p.str());
            }
            out << "wrote " << n << " channel and " << asc.size() << " precoder files to " << dir.string() << "\n";
        } else if (train->parsed()) {
            const double snr = config.snr_db.back();
            const auto res = train_reference(config, snr, config.sigma_gamma2.front(), config.seed);
            std::ostringstream c, t;
            write_coefficients_csv(c, res.state);
            write_mse_trace_csv(t, res.trace);
            write_file(dir / "predistorter_coeffs.csv", c.str());
            write_file(dir / "mse_trace.csv", t.str());
            out << "trained at " << fmt(snr) << " dB: " << res.state.iteration << " steps, "
                << res.state.rejected << " rejected, final smoothed mse "
                << fmt(res.trace.smoothed.empty() ? 0.0 : res.trace.smoothed.back()) << "\n";
        } else if (sweep_ber->parsed()) {
            const auto result = sweep(config);
            std::ostringstream s;
            write_ber_csv(s, result);
            const std::string stem =
                "ber_u" + std::to_string(config.num_users) + "_m" + std::to_string(config.modulation_order);
            write_file(dir / (stem + ".csv"), s.str());
            if (svg) {
                std::ostringstream g;
                write_ber_svg(g, result, stem);
                write_file(dir / (stem + ".svg"), g.str());
            }
            std::size_t skipped = 0;
            for (const auto& p : result.points) {
                if (p.ok) continue;
                ++skipped;
                nlohmann::json j{{"notice", "point skipped"},
                                 {"snr_db", p.snr_db},
                                 {"sigma_gamma2", p.sigma_gamma2},
                                 {"variant", to_string(p.variant)},
                                 {"reason", p.notice}};
                err << j.dump() << "\n";
            }
            out << "wrote " << (dir / (stem + ".csv")).string() << " (" << result.points.size() - skipped
                << " points, " << skipped << " skipped)\n";
        } else if (sum_rate_cmd->parsed()) {
            const auto curve = sum_rate_experiment(config);
            std::ostringstream s;
            write_rate_csv(s, curve);
            write_file(dir / "sum_rate.csv", s.str());
            if (svg) {
                std::ostringstream g;
                write_rate_svg(g, curve, "sum rate");
                write_file(dir / "sum_rate.svg", g.str());
            }
            for (const auto& r : curve.rows)
                for (const auto& rej : r.rejected) {
                    nlohmann::json j{{"notice", "user rejected"}, {"users", r.users},
                                     {"variant", to_string(r.variant)}, {"user", rej.user_id},
                                     {"reason", rej.reason}};
                    err << j.dump() << "\n";
                }
            out << "wrote " << (dir / "sum_rate.csv").string();
            if (curve.first_infeasible) out << " (proposed scheme infeasible from U=" << *curve.first_infeasible << ")";
            out << "\n";
        } else if (theorem1->parsed()) {
            const auto rows = theorem1_experiment(config);
            std::ostringstream s;
            write_theorem1_csv(s, rows);
            write_file(dir / "theorem1.csv", s.str());
            std::size_t holds = 0, degenerate = 0;
            for (const auto& r : rows) {
                holds += r.report.holds;
                degenerate += r.report.degenerate_gap;
            }
            out << "wrote " << (dir / "theorem1.csv").string() << ": bound holds on " << holds << "/"
                << rows.size() << " cases, " << degenerate << " degenerate\n";
        } else if (ladder->parsed()) {
            std::vector<double> powers;
            for (const auto& t : split(powers_text, ',')) powers.push_back(to_double(t, "--powers"));
            if (powers.empty()) throw UsageError("--powers must list at least one power");
            const Constellation qam(order.value_or(config.modulation_order));
            const auto l = mu_ladder(qam, powers);
            out << "layer,index,parent,mu\n";
            for (std::size_t b = 1; b < l.layers.size(); ++b)
                for (std::size_t i = 0; i < l.layers[b].size(); ++i)
                    out << b << "," << i << "," << l.layers[b][i].parent << "," << fmt(l.layers[b][i].mu) << "\n";
            const double ps = ber_sqrt_m(l, sigma2);
            out << "# sigma2=" << fmt(sigma2) << " P_sqrtM=" << fmt(ps) << " P_M=" << fmt(ber_qam(ps)) << "\n";
        }
        return kExitOk;
    } catch (const UsageError& e) {
        report(err, "usage", e.what());
        return kExitUsage;
    } catch (const ConfigParseError& e) {
        report(err, "parse", e.what());
        return kExitParse;
    } catch (const ConfigSchemaError& e) {
        report(err, "schema", e.what());
        return kExitSchema;
    } catch (const GeometryError& e) {
        report(err, "geometry", e.what());
        return kExitGeometry;
    } catch (const std::exception& e) {
        report(err, "runtime", e.what());
        return kExitRuntime;
    }
}

}  // namespace vlcnoma
