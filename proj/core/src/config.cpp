// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace afgs {

std::string_view to_string(TrainingProfile p) {
    return p == TrainingProfile::monocular ? "monocular" : "multiview";
}

std::optional<TrainingProfile> parse_training_profile(std::string_view name) {
    if (name == "monocular") return TrainingProfile::monocular;
    if (name == "multiview") return TrainingProfile::multiview;
    return std::nullopt;
}

RunConfig profile_defaults(TrainingProfile profile) {
    RunConfig c;
    c.profile = profile;
    c.filter.kind = FilterKind::adaptive4d;
    c.filter.sigma_s = 0.2;
    c.filter.rho_min = 0.2;
    c.filter.rho_max = 5.0;
    c.filter.epsilon = 1e-4;
    c.train.lambda_scale = 0.1;
    c.train.lambda_v = 0.2;
    c.train.warmup_iterations = 3000;
    c.train.switch_iteration = 6000;
    c.train.total_iterations = 10000;
    if (profile == TrainingProfile::monocular) {
        c.filter.rho_thre = 0.05;
        c.train.scale_mode = ScaleLossMode::sum;
    } else {
        c.filter.rho_thre = 5e-6;
        c.train.scale_mode = ScaleLossMode::mean;
    }
    return c;
}

namespace {

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string &key, const std::string &v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("setting '" + key + "': expected a number, got '" + v + "'");
    return out;
}

long long to_integer(const std::string &key, const std::string &v) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("setting '" + key + "': expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string &key, const std::string &v) {
    if (v == "1" || v == "true" || v == "on") return true;
    if (v == "0" || v == "false" || v == "off") return false;
    throw ConfigError("setting '" + key + "': expected true or false, got '" + v + "'");
}

using Setter = std::function<void(RunConfig &, const std::string &, const std::string &)>;

const std::map<std::string, Setter> &setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto num = [&t](const char *key, auto member) {
            t[key] = [member](RunConfig &c, const std::string &k, const std::string &v) { member(c) = to_double(k, v); };
        };
        auto integer = [&t](const char *key, auto member) {
            t[key] = [member](RunConfig &c, const std::string &k, const std::string &v) {
                member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(to_integer(k, v));
            };
        };
        t["filter"] = [](RunConfig &c, const std::string &k, const std::string &v) {
            const auto kind = parse_filter_kind(v);
            if (!kind) throw ConfigError("setting '" + k + "': unknown filter '" + v + "'");
            c.filter.kind = *kind;
        };
        t["scale_loss"] = [](RunConfig &c, const std::string &k, const std::string &v) {
            if (v == "sum") c.train.scale_mode = ScaleLossMode::sum;
            else if (v == "mean") c.train.scale_mode = ScaleLossMode::mean;
            else throw ConfigError("setting '" + k + "': expected sum or mean");
        };
        t["per_axis"] = [](RunConfig &c, const std::string &k, const std::string &v) { c.filter.per_axis = to_bool(k, v); };
        t["screen_mip"] = [](RunConfig &c, const std::string &k, const std::string &v) { c.filter.screen_mip = to_bool(k, v); };
        t["background"] = [](RunConfig &c, const std::string &k, const std::string &v) {
            const double g = to_double(k, v);
            c.train.background = Vec3::Constant(g);
        };
        num("sigma_s", [](RunConfig &c) -> double & { return c.filter.sigma_s; });
        num("rho_min", [](RunConfig &c) -> double & { return c.filter.rho_min; });
        num("rho_max", [](RunConfig &c) -> double & { return c.filter.rho_max; });
        num("rho_thre", [](RunConfig &c) -> double & { return c.filter.rho_thre; });
        num("epsilon", [](RunConfig &c) -> double & { return c.filter.epsilon; });
        num("lambda_scale", [](RunConfig &c) -> double & { return c.train.lambda_scale; });
        num("lambda_v", [](RunConfig &c) -> double & { return c.train.lambda_v; });
        num("lr_position", [](RunConfig &c) -> double & { return c.train.lr.position; });
        num("lr_position_final", [](RunConfig &c) -> double & { return c.train.lr.position_final; });
        num("lr_rotation", [](RunConfig &c) -> double & { return c.train.lr.rotation; });
        num("lr_scale", [](RunConfig &c) -> double & { return c.train.lr.scale; });
        num("lr_opacity", [](RunConfig &c) -> double & { return c.train.lr.opacity; });
        num("lr_color", [](RunConfig &c) -> double & { return c.train.lr.color; });
        num("lr_deformation", [](RunConfig &c) -> double & { return c.train.lr.deformation; });
        integer("warmup", [](RunConfig &c) -> int & { return c.train.warmup_iterations; });
        integer("switch", [](RunConfig &c) -> int & { return c.train.switch_iteration; });
        integer("iterations", [](RunConfig &c) -> int & { return c.train.total_iterations; });
        integer("static_refresh", [](RunConfig &c) -> int & { return c.train.static_refresh; });
        integer("seed", [](RunConfig &c) -> std::uint64_t & { return c.train.seed; });
        integer("workers", [](RunConfig &c) -> int & { return c.train.render.workers; });
        integer("primitives", [](RunConfig &c) -> int & { return c.primitives; });
        integer("checkpoint_every", [](RunConfig &c) -> int & { return c.checkpoint_every; });
        return t;
    }();
    return table;
}

} // namespace

const std::vector<std::string> &setting_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto &[name, _] : setters()) k.push_back(name);
        return k;
    }();
    return keys;
}

Settings parse_settings(const std::string &text) {
    Settings out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
        out[key] = value;
    }
    return out;
}

Settings load_settings(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_settings(ss.str());
}

void apply_settings(RunConfig &config, const Settings &settings) {
    const auto &table = setters();
    for (const auto &[key, value] : settings) {
        const auto it = table.find(key);
        if (it == table.end()) throw ConfigError("unknown setting '" + key + "'");
        it->second(config, key, value);
    }
}

} // namespace afgs
