// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures for the unit and acceptance tests.

#pragma once

#include "afgs/backward.hpp"
#include "afgs/rasterizer.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace afgs::testing {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    Vec3 vec3(double lo, double hi) { return Vec3(uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)); }
    Quat unit_quat() {
        Quat q(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
        while (q.norm() < 0.1) q = Quat(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
        return q.normalized();
    }
    std::mt19937_64 &engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

inline CameraModel front_camera(int width, int height, double f, double distance = 4.0) {
    return look_at(Vec3(0.0, 0.0, -distance), Vec3::Zero(), Vec3(0.0, 1.0, 0.0), f, width, height, 0);
}

/// Render options without the cutoff and early-stop discontinuities, for
/// finite-difference checks.
inline RenderOptions smooth_options() {
    RenderOptions o;
    o.alpha_cutoff = 1e-12;
    o.early_termination = false;
    return o;
}

/// Parameters of a scene addressed as a flat list for finite differences.
struct ParamRef {
    std::string group;
    std::function<double &(Scene &)> ref;
};

inline std::vector<ParamRef> parameter_refs(const Scene &scene, const std::string &group) {
    std::vector<ParamRef> out;
    for (std::size_t k = 0; k < scene.size(); ++k) {
        auto add = [&](int n, auto getter) {
            for (int c = 0; c < n; ++c)
                out.push_back({group, [=](Scene &s) -> double & { return getter(s)[c]; }});
        };
        if (group == "position") add(3, [k](Scene &s) -> Vec3 & { return s.primitives[k].p; });
        if (group == "rotation") add(4, [k](Scene &s) -> Quat & { return s.primitives[k].r; });
        if (group == "scale") add(3, [k](Scene &s) -> Vec3 & { return s.primitives[k].s; });
        if (group == "color") add(3, [k](Scene &s) -> Vec3 & { return s.primitives[k].color; });
        if (group == "opacity")
            out.push_back({group, [k](Scene &s) -> double & { return s.primitives[k].alpha; }});
        if (k < scene.tracks.size())
            for (std::size_t j = 0; j < scene.tracks[k].size(); ++j) {
                if (group == "dp") add(3, [k, j](Scene &s) -> Vec3 & { return s.tracks[k].keyframes[j].dp; });
                if (group == "dr") add(4, [k, j](Scene &s) -> Quat & { return s.tracks[k].keyframes[j].dr; });
                if (group == "ds") add(3, [k, j](Scene &s) -> Vec3 & { return s.tracks[k].keyframes[j].ds; });
            }
    }
    return out;
}

/// Analytic gradient entries in the same order as parameter_refs().
inline std::vector<double> gradient_entries(const Scene &scene, const SceneGradient &g, const std::string &group) {
    std::vector<double> out;
    for (std::size_t k = 0; k < scene.size(); ++k) {
        const auto &pg = g.primitives[k];
        auto add = [&](const auto &v) {
            for (int c = 0; c < v.size(); ++c) out.push_back(v[c]);
        };
        if (group == "position") add(pg.p);
        if (group == "rotation") add(pg.r);
        if (group == "scale") add(pg.s);
        if (group == "color") add(pg.color);
        if (group == "opacity") out.push_back(pg.alpha);
        if (k < scene.tracks.size())
            for (std::size_t j = 0; j < scene.tracks[k].size(); ++j) {
                if (group == "dp") add(g.keyframes[k][j].dp);
                if (group == "dr") add(g.keyframes[k][j].dr);
                if (group == "ds") add(g.keyframes[k][j].ds);
            }
    }
    return out;
}

inline const std::vector<std::string> &gradient_groups() {
    static const std::vector<std::string> g = {"position", "rotation", "scale", "opacity",
                                               "color",    "dp",       "dr",    "ds"};
    return g;
}

/// |a - n| <= rel * max(|a|, |n|) + abs_floor
inline bool gradients_agree(double analytic, double numeric, double rel = 1e-3, double abs_floor = 1e-7) {
    return std::abs(analytic - numeric) <= rel * std::max(std::abs(analytic), std::abs(numeric)) + abs_floor;
}

/// Random small dynamic scene in front of front_camera(): primitives kept well inside
/// the view, with tracked intervals so the object-space filters are active.
inline Scene random_gradient_scene(Rng &rng, int count, int keyframes) {
    Scene scene;
    std::vector<double> times;
    for (int j = 0; j < keyframes; ++j) times.push_back(keyframes > 1 ? double(j) / (keyframes - 1) : 0.0);
    for (int k = 0; k < count; ++k) {
        GaussianPrimitive g;
        g.id = k;
        g.p = rng.vec3(-0.4, 0.4);
        g.r = rng.unit_quat();
        g.s = rng.vec3(0.08, 0.25);
        g.alpha = rng.uniform(0.3, 0.85);
        g.color = rng.vec3(0.1, 0.9);
        g.min_sampling_interval = rng.uniform(0.05, 0.15);
        scene.primitives.push_back(g);
        DeformationTrack tr;
        tr.times = times;
        for (int j = 0; j < keyframes; ++j) {
            Keyframe kf;
            kf.dp = rng.vec3(-0.1, 0.1);
            kf.dr = quat_normalized(Quat(1.0, rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)));
            kf.ds = rng.vec3(-0.04, 0.04);
            tr.keyframes.push_back(kf);
        }
        scene.tracks.push_back(tr);
    }
    return scene;
}

/// sum_i w_i rgb_i for fixed weights, so dL/drgb = w.
inline double weighted_sum(const RenderedImage &img, const std::vector<double> &w) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * img.rgb[i];
    return s;
}

} // namespace afgs::testing
