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

#include "vlcnoma/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace vlcnoma {

std::string fmt(double v) {
    char buf[40];
    if (v == 0.0) v = 0.0;  // no "-0" in files
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_channel_csv(std::ostream& out, const ChannelMatrix& h) {
    out << "# user=" << h.user_id << " MR=" << h.gains.rows() << " MT=" << h.gains.cols() << "\n";
    for (Eigen::Index i = 0; i < h.gains.rows(); ++i) {
        for (Eigen::Index j = 0; j < h.gains.cols(); ++j) out << (j ? "," : "") << fmt(h.gains(i, j));
        out << "\n";
    }
}

void write_precoder_csv(std::ostream& out, int user_id, const Precoder& p) {
    out << "# user=" << user_id << " lambda=" << fmt(p.lambda()) << " variant=" << to_string(p.variant())
        << " bias=" << fmt(p.bias()) << "\n";
    const Mat& m = p.matrix();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << fmt(m(i, j));
        out << "\n";
    }
}

void write_coefficients_csv(std::ostream& out, const PredistorterState& state) {
    out << "# eta=" << fmt(state.eta) << " beta=" << fmt(state.beta) << " ncheb=" << state.coeffs.size()
        << "\n";
    for (double c : state.coeffs) out << fmt(c) << "\n";
}

void write_mse_trace_csv(std::ostream& out, const MseTrace& trace) {
    out << "window,samples,mse,mse_smoothed\n";
    for (std::size_t i = 0; i < trace.window_mse.size(); ++i)
        out << i << "," << (i + 1) * trace.window << "," << fmt(trace.window_mse[i]) << ","
            << fmt(trace.smoothed[i]) << "\n";
}

void write_ber_csv(std::ostream& out, const BerSweep& sweep) {
    out << kBerHeader << "\n";
    for (const auto& p : sweep.points) {
        if (!p.ok) continue;
        for (const auto& u : p.users)
            out << fmt(p.snr_db) << "," << to_string(p.variant) << "," << u.user_id << ","
                << fmt(p.sigma_gamma2) << "," << fmt(u.ber) << "," << fmt(u.ci_lo) << "," << fmt(u.ci_hi)
                << "," << fmt(u.analytic) << "," << fmt(u.sinr) << "," << fmt(u.rate) << "\n";
    }
}

void write_rate_csv(std::ostream& out, const RateCurve& curve) {
    out << kRateHeader << "\n";
    for (const auto& r : curve.rows)
        out << r.users << "," << to_string(r.variant) << "," << fmt(r.sum_rate) << ","
            << (r.feasible ? "true" : "false") << "\n";
}

void write_theorem1_csv(std::ostream& out, const std::vector<Theorem1Row>& rows) {
    out << "user_b,user_b_prime,kappa,lhs,lhs_stderr,rhs,margin,mean_delta,holds,degenerate_gap\n";
    for (const auto& r : rows)
        out << r.user_b << "," << r.user_b_prime << "," << fmt(r.kappa) << "," << fmt(r.report.lhs) << ","
            << fmt(r.report.lhs_stderr) << "," << fmt(r.report.rhs) << "," << fmt(r.report.margin) << ","
            << fmt(r.report.mean_delta) << "," << (r.report.holds ? "true" : "false") << ","
            << (r.report.degenerate_gap ? "true" : "false") << "\n";
}

namespace {

constexpr double kW = 640, kH = 420, kL = 70, kR = 190, kT = 40, kB = 50;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                         "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> pts;
};

void svg_plot(std::ostream& out, const std::vector<Series>& series, const std::string& title,
              const std::string& xlabel, const std::string& ylabel, bool log_y) {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
    for (const auto& s : series)
        for (auto [x, y] : s.pts) {
            if (log_y && !(y > 0.0)) continue;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, ty(y));
            y1 = std::max(y1, ty(y));
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (log_y) y0 = std::floor(y0), y1 = std::ceil(y1);
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double pw = kW - kL - kR, ph = kH - kT - kB;
    auto px = [&](double x) { return kL + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kT + (1.0 - (ty(y) - y0) / (y1 - y0)) * ph; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kL << "\" y=\"22\" font-size=\"14\">" << title << "</text>\n";
    out << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    if (log_y) {
        for (int e = static_cast<int>(y0); e <= static_cast<int>(y1); ++e) {
            const double yy = kT + (1.0 - (e - y0) / (y1 - y0)) * ph;
            out << "<line x1=\"" << kL << "\" x2=\"" << kL + pw << "\" y1=\"" << yy << "\" y2=\"" << yy
                << "\" stroke=\"#ddd\"/><text x=\"" << kL - 6 << "\" y=\"" << yy + 4
                << "\" text-anchor=\"end\">1e" << e << "</text>\n";
        }
    } else {
        for (int i = 0; i <= 4; ++i) {
            const double v = y0 + (y1 - y0) * i / 4.0;
            const double yy = kT + (1.0 - i / 4.0) * ph;
            out << "<text x=\"" << kL - 6 << "\" y=\"" << yy + 4 << "\" text-anchor=\"end\">" << fmt(v)
                << "</text>\n";
        }
    }
    for (int i = 0; i <= 5; ++i) {
        const double v = x0 + (x1 - x0) * i / 5.0;
        out << "<text x=\"" << px(v) << "\" y=\"" << kT + ph + 16 << "\" text-anchor=\"middle\">" << fmt(v)
            << "</text>\n";
    }
    out << "<text x=\"" << kL + pw / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">" << xlabel
        << "</text>\n";
    out << "<text transform=\"translate(16," << kT + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << ylabel << "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = kColors[i % std::size(kColors)];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (auto [x, y] : series[i].pts)
            if (!log_y || y > 0.0) out << fmt(px(x)) << "," << fmt(py(y)) << " ";
        out << "\"/>\n";
        const double ly = kT + 12 + 16 * static_cast<double>(i);
        out << "<line x1=\"" << kW - kR + 10 << "\" x2=\"" << kW - kR + 30 << "\" y1=\"" << ly << "\" y2=\""
            << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/><text x=\"" << kW - kR + 34
            << "\" y=\"" << ly + 4 << "\">" << series[i].label << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace

void write_ber_svg(std::ostream& out, const BerSweep& sweep, const std::string& title) {
    std::map<std::tuple<int, int, double>, Series> by_key;
    for (const auto& p : sweep.points) {
        if (!p.ok) continue;
        for (const auto& u : p.users) {
            auto& s = by_key[{static_cast<int>(p.variant), u.user_id, p.sigma_gamma2}];
            if (s.label.empty())
                s.label = to_string(p.variant) + " U" + std::to_string(u.user_id) + " sg2=" + fmt(p.sigma_gamma2);
            s.pts.emplace_back(p.snr_db, u.ber);
        }
    }
    std::vector<Series> series;
    for (auto& [_, s] : by_key) series.push_back(std::move(s));
    svg_plot(out, series, title, "SNR (dB)", "BER", true);
}

void write_rate_svg(std::ostream& out, const RateCurve& curve, const std::string& title) {
    std::map<int, Series> by_variant;
    for (const auto& r : curve.rows) {
        if (!r.feasible && r.variant != Variant::Grpa) continue;
        auto& s = by_variant[static_cast<int>(r.variant)];
        s.label = to_string(r.variant);
        s.pts.emplace_back(r.users, r.sum_rate);
    }
    std::vector<Series> series;
    for (auto& [_, s] : by_variant) series.push_back(std::move(s));
    svg_plot(out, series, title, "users", "sum rate (bpcu)", false);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
    if (!f) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace vlcnoma
