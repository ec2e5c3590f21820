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

#include "vlcnoma/config.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace vlcnoma {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kCm2 = 1e-4;

[[noreturn]] void schema(const std::string& where, const std::string& what) {
    throw ConfigSchemaError(where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) schema(where, "expected an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) schema(where, "unknown key '" + key + "'");
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) schema(where, "expected a number");
    return v.get<double>();
}

std::uint64_t count(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        if (v.get<std::int64_t>() < 0) schema(where, "expected a nonnegative integer");
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d >= 0.0 && d < 1.8e19 && std::floor(d) == d) return static_cast<std::uint64_t>(d);
    }
    schema(where, "expected a nonnegative integer");
}

int small_int(const json& v, const std::string& where) {
    const auto c = count(v, where);
    if (c > 1u << 30) schema(where, "value out of range");
    return static_cast<int>(c);
}

std::vector<double> numbers(const json& v, const std::string& where) {
    if (!v.is_array()) schema(where, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(number(e, where));
    return out;
}

Vec3 vec3(const json& v, const std::string& where) {
    const auto n = numbers(v, where);
    if (n.size() != 3) schema(where, "expected three coordinates");
    return {n[0], n[1], n[2]};
}

std::vector<Vec3> points(const json& v, const std::string& where) {
    if (!v.is_array()) schema(where, "expected an array of points");
    std::vector<Vec3> out;
    for (const auto& e : v) out.push_back(vec3(e, where));
    return out;
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_json(const std::vector<Vec3>& pts) {
    json a = json::array();
    for (const auto& p : pts) a.push_back(to_json(p));
    return a;
}

// A unit value whose conversion reproduces `target` bit for bit.
double exact_inverse(double target, double factor) {
    double guess = target / factor;
    if (guess * factor == target) return guess;
    double lo = guess, hi = guess;
    for (int i = 0; i < 64; ++i) {
        lo = std::nextafter(lo, -INFINITY);
        hi = std::nextafter(hi, INFINITY);
        if (lo * factor == target) return lo;
        if (hi * factor == target) return hi;
    }
    return guess;
}

void apply_room(const json& j, RoomGeometry& room) {
    check_keys(j, "room", {"dims", "led_positions", "led_height", "half_angle_deg", "ceiling_center"});
    if (j.contains("dims")) room.room_dims = vec3(j["dims"], "room.dims");
    if (j.contains("led_positions")) room.led_positions = points(j["led_positions"], "room.led_positions");
    if (j.contains("led_height")) room.led_height = number(j["led_height"], "room.led_height");
    if (j.contains("half_angle_deg")) room.half_angle = number(j["half_angle_deg"], "room.half_angle_deg") * kDeg;
    if (j.contains("ceiling_center")) room.ceiling_center = vec3(j["ceiling_center"], "room.ceiling_center");
}

UserGeometry parse_user(const json& j, const UserGeometry& fallback, const std::string& where) {
    check_keys(j, where, {"pd_positions", "pd_area_cm2", "fov_deg"});
    UserGeometry u = fallback;
    if (j.contains("pd_positions")) u.pd_positions = points(j["pd_positions"], where + ".pd_positions");
    if (j.contains("pd_area_cm2")) u.pd_area = number(j["pd_area_cm2"], where + ".pd_area_cm2") * kCm2;
    if (j.contains("fov_deg")) u.fov = number(j["fov_deg"], where + ".fov_deg") * kDeg;
    return u;
}

}  // namespace

double parse_sigma_gamma2(const std::string& text) {
    std::string s = text;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    bool db = false;
    if (s.size() > 2 && (s.ends_with("dB") || s.ends_with("db"))) {
        db = true;
        s.resize(s.size() - 2);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ConfigSchemaError("sigma_gamma2: cannot read '" + text + "'");
    return db ? sigma_gamma2_from_db(v) : v;
}

SimConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigParseError(e.what());
    }
    check_keys(j, "config",
               {"room", "users", "num_users", "modulation_order", "qos_rates", "sum_rate_qos_rates",
                "snr_db", "sigma_gamma2", "eta", "beta", "n_cheb", "lambda1", "symbols_per_point",
                "shards", "seed", "variants", "led", "drive_peak", "bias_headroom", "training_fraction", "training_epochs",
                "sum_rate_snr_db", "theorem1_kappas", "theorem1_samples", "threads"});

    SimConfig c = default_config();
    if (j.contains("room")) apply_room(j["room"], c.room);
    if (j.contains("users")) {
        const auto& arr = j["users"];
        if (!arr.is_array()) schema("users", "expected an array");
        std::vector<UserGeometry> users;
        for (std::size_t i = 0; i < arr.size(); ++i)
            users.push_back(parse_user(arr[i], i < c.users.size() ? c.users[i] : c.users.back(),
                                       "users[" + std::to_string(i) + "]"));
        c.users = std::move(users);
    }
    if (j.contains("num_users")) c.num_users = small_int(j["num_users"], "num_users");
    if (j.contains("modulation_order")) c.modulation_order = small_int(j["modulation_order"], "modulation_order");
    if (j.contains("qos_rates")) c.qos_rates = numbers(j["qos_rates"], "qos_rates");
    if (j.contains("sum_rate_qos_rates"))
        c.sum_rate_qos_rates = numbers(j["sum_rate_qos_rates"], "sum_rate_qos_rates");
    if (j.contains("snr_db")) c.snr_db = numbers(j["snr_db"], "snr_db");
    if (j.contains("sigma_gamma2")) {
        const auto& arr = j["sigma_gamma2"];
        if (!arr.is_array()) schema("sigma_gamma2", "expected an array");
        c.sigma_gamma2.clear();
        for (const auto& e : arr) {
            if (e.is_string())
                c.sigma_gamma2.push_back(parse_sigma_gamma2(e.get<std::string>()));
            else
                c.sigma_gamma2.push_back(number(e, "sigma_gamma2"));
        }
    }
    if (j.contains("eta")) c.eta = number(j["eta"], "eta");
    if (j.contains("beta")) c.beta = number(j["beta"], "beta");
    if (j.contains("n_cheb")) c.n_cheb = small_int(j["n_cheb"], "n_cheb");
    if (j.contains("lambda1")) c.lambda1 = number(j["lambda1"], "lambda1");
    if (j.contains("symbols_per_point")) c.symbols_per_point = count(j["symbols_per_point"], "symbols_per_point");
    if (j.contains("shards")) c.shards = count(j["shards"], "shards");
    if (j.contains("seed")) c.seed = count(j["seed"], "seed");
    if (j.contains("variants")) {
        const auto& arr = j["variants"];
        if (!arr.is_array()) schema("variants", "expected an array of tags");
        c.variants.clear();
        for (const auto& e : arr) {
            if (!e.is_string()) schema("variants", "expected a string tag");
            try {
                c.variants.push_back(parse_variant(e.get<std::string>()));
            } catch (const std::invalid_argument& err) {
                schema("variants", err.what());
            }
        }
    }
    if (j.contains("led")) {
        check_keys(j["led"], "led", {"i_max", "p"});
        if (j["led"].contains("i_max")) c.led.i_max = number(j["led"]["i_max"], "led.i_max");
        if (j["led"].contains("p")) c.led.p = number(j["led"]["p"], "led.p");
    }
    if (j.contains("drive_peak")) c.drive_peak = number(j["drive_peak"], "drive_peak");
    if (j.contains("bias_headroom")) c.bias_headroom = number(j["bias_headroom"], "bias_headroom");
    if (j.contains("training_fraction")) c.training_fraction = number(j["training_fraction"], "training_fraction");
    if (j.contains("training_epochs")) c.training_epochs = count(j["training_epochs"], "training_epochs");
    if (j.contains("sum_rate_snr_db")) c.sum_rate_snr_db = number(j["sum_rate_snr_db"], "sum_rate_snr_db");
    if (j.contains("theorem1_kappas")) c.theorem1_kappas = numbers(j["theorem1_kappas"], "theorem1_kappas");
    if (j.contains("theorem1_samples")) c.theorem1_samples = count(j["theorem1_samples"], "theorem1_samples");
    if (j.contains("threads")) c.threads = count(j["threads"], "threads");

    try {
        validate(c);
    } catch (const GeometryError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigSchemaError(e.what());
    }
    return c;
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigParseError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const SimConfig& c) {
    json j;
    j["room"] = {{"dims", to_json(c.room.room_dims)},
                 {"led_positions", to_json(c.room.led_positions)},
                 {"led_height", c.room.led_height},
                 {"half_angle_deg", exact_inverse(c.room.half_angle, kDeg)},
                 {"ceiling_center", to_json(c.room.ceiling_center)}};
    j["users"] = json::array();
    for (const auto& u : c.users)
        j["users"].push_back({{"pd_positions", to_json(u.pd_positions)},
                              {"pd_area_cm2", exact_inverse(u.pd_area, kCm2)},
                              {"fov_deg", exact_inverse(u.fov, kDeg)}});
    j["num_users"] = c.num_users;
    j["modulation_order"] = c.modulation_order;
    j["qos_rates"] = c.qos_rates;
    j["sum_rate_qos_rates"] = c.sum_rate_qos_rates;
    j["snr_db"] = c.snr_db;
    j["sigma_gamma2"] = c.sigma_gamma2;
    j["eta"] = c.eta;
    j["beta"] = c.beta;
    j["n_cheb"] = c.n_cheb;
    j["lambda1"] = c.lambda1;
    j["symbols_per_point"] = c.symbols_per_point;
    j["shards"] = c.shards;
    j["seed"] = c.seed;
    j["variants"] = json::array();
    for (Variant v : c.variants) j["variants"].push_back(to_string(v));
    j["led"] = {{"i_max", c.led.i_max}, {"p", c.led.p}};
    j["drive_peak"] = c.drive_peak;
    j["bias_headroom"] = c.bias_headroom;
    j["training_fraction"] = c.training_fraction;
    j["training_epochs"] = c.training_epochs;
    j["sum_rate_snr_db"] = c.sum_rate_snr_db;
    j["theorem1_kappas"] = c.theorem1_kappas;
    j["theorem1_samples"] = c.theorem1_samples;
    j["threads"] = c.threads;
    return j.dump(2) + "\n";
}

}  // namespace vlcnoma
