// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/scenes.hpp"

#include "afgs/rasterizer.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace afgs {

std::string_view to_string(SceneProfile p) {
    switch (p) {
    case SceneProfile::orbiting_blobs: return "orbiting_blobs";
    case SceneProfile::pulsing_grid: return "pulsing_grid";
    case SceneProfile::thin_structures: return "thin_structures";
    }
    return "unknown";
}

std::string_view to_string(RigProfile p) {
    switch (p) {
    case RigProfile::monocular_arc: return "monocular_arc";
    case RigProfile::multiview_ring: return "multiview_ring";
    }
    return "unknown";
}

std::optional<SceneProfile> parse_scene_profile(std::string_view name) {
    for (auto p : {SceneProfile::orbiting_blobs, SceneProfile::pulsing_grid, SceneProfile::thin_structures})
        if (to_string(p) == name) return p;
    return std::nullopt;
}

std::optional<RigProfile> parse_rig_profile(std::string_view name) {
    for (auto p : {RigProfile::monocular_arc, RigProfile::multiview_ring})
        if (to_string(p) == name) return p;
    return std::nullopt;
}

std::vector<double> ground_truth_keyframe_times() {
    std::vector<double> times(33);
    for (int j = 0; j <= 32; ++j) times[j] = j / 32.0;
    return times;
}

std::vector<double> default_timesteps(int count) {
    if (count < 1) throw std::invalid_argument("timestep count must be positive");
    std::vector<double> times(count, 0.0);
    for (int j = 1; j < count; ++j) times[j] = double(j) / (count - 1);
    return times;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Portable uniform draws: std distributions differ across standard libraries.
class Random {
public:
    explicit Random(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int integer(int n) { return int(uniform() * n) % n; }
    Vec3 in_box(double half) { return Vec3(uniform(-half, half), uniform(-half, half), uniform(-half, half)); }
    Vec3 unit_vector() {
        const double z = uniform(-1.0, 1.0), phi = uniform(0.0, kTwoPi);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        return Vec3(r * std::cos(phi), r * std::sin(phi), z);
    }
    Quat rotation() { return quat_from_axis_angle(unit_vector(), uniform(0.0, std::numbers::pi)); }
    Vec3 color() { return Vec3(uniform(0.15, 0.95), uniform(0.15, 0.95), uniform(0.15, 0.95)); }

private:
    std::mt19937_64 engine_;
};

DeformationTrack sample_track(const std::vector<double> &times, auto &&at) {
    DeformationTrack track;
    track.times = times;
    for (double t : times) track.keyframes.push_back(at(t));
    return track;
}

void orbiting_blobs(Scene &scene, Random &rng, int count) {
    const auto times = ground_truth_keyframe_times();
    for (int k = 0; k < count; ++k) {
        GaussianPrimitive g;
        g.id = k;
        g.p = rng.in_box(0.55);
        g.r = rng.rotation();
        g.s = Vec3(rng.uniform(0.06, 0.14), rng.uniform(0.06, 0.14), rng.uniform(0.06, 0.14));
        g.alpha = rng.uniform(0.7, 0.95);
        g.color = rng.color();
        const Vec3 n = rng.unit_vector();
        const Vec3 u = n.unitOrthogonal(), v = n.cross(u);
        const double radius = rng.uniform(0.15, 0.3), phase = rng.uniform(0.0, kTwoPi);
        const Vec3 spin = rng.unit_vector();
        scene.primitives.push_back(g);
        scene.tracks.push_back(sample_track(times, [&](double t) {
            Keyframe kf;
            const double a = kTwoPi * t + phase;
            kf.dp = radius * ((std::cos(a) - std::cos(phase)) * u + (std::sin(a) - std::sin(phase)) * v);
            kf.dr = quat_from_axis_angle(spin, 0.8 * t);
            return kf;
        }));
    }
}

void pulsing_grid(Scene &scene, Random &rng, int count) {
    const auto times = ground_truth_keyframe_times();
    const int side = int(std::ceil(std::sqrt(double(count))));
    const double spacing = side > 1 ? 1.4 / (side - 1) : 0.0;
    for (int k = 0; k < count; ++k) {
        GaussianPrimitive g;
        g.id = k;
        const int ix = k % side, iy = k / side;
        g.p = Vec3(-0.7 + spacing * ix, -0.7 + spacing * iy, rng.uniform(-0.1, 0.1));
        g.r = rng.rotation();
        g.s = Vec3(rng.uniform(0.03, 0.06), rng.uniform(0.03, 0.06), rng.uniform(0.03, 0.06));
        g.alpha = rng.uniform(0.75, 0.95);
        g.color = rng.color();
        // Phases on the keyframe lattice so sin = +-1 falls exactly on keyframes.
        const double phase = kTwoPi * rng.integer(32) / 32.0;
        scene.primitives.push_back(g);
        scene.tracks.push_back(sample_track(times, [&](double t) {
            Keyframe kf;
            kf.ds = g.s * (std::pow(kPulseAmplitude, std::sin(kTwoPi * t + phase)) - 1.0);
            return kf;
        }));
    }
}

void thin_structures(Scene &scene, Random &rng, int count) {
    const auto times = ground_truth_keyframe_times();
    for (int k = 0; k < count; ++k) {
        GaussianPrimitive g;
        g.id = k;
        g.p = rng.in_box(0.6);
        g.r = rng.rotation();
        const double length = rng.uniform(0.2, 0.35), ratio = rng.uniform(12.0, 20.0);
        g.s = Vec3(length, length / ratio, length / ratio);
        g.alpha = rng.uniform(0.75, 0.95);
        g.color = rng.color();
        const Vec3 axis = rng.unit_vector(), drift = 0.1 * rng.unit_vector();
        scene.primitives.push_back(g);
        scene.tracks.push_back(sample_track(times, [&](double t) {
            Keyframe kf;
            kf.dp = drift * t;
            kf.dr = quat_from_axis_angle(axis, 0.4 * t);
            return kf;
        }));
    }
}

} // namespace

Scene make_scene(SceneProfile profile, std::uint64_t seed, int count) {
    if (count < 1) throw std::invalid_argument("make_scene: primitive count must be at least 1");
    Random rng(seed);
    Scene scene;
    switch (profile) {
    case SceneProfile::orbiting_blobs: orbiting_blobs(scene, rng, count); break;
    case SceneProfile::pulsing_grid: pulsing_grid(scene, rng, count); break;
    case SceneProfile::thin_structures: thin_structures(scene, rng, count); break;
    }
    return scene;
}

namespace {

CameraModel ring_camera(double angle, double f, int width, int height, int index, const RigOptions &o) {
    const Vec3 eye(o.radius * std::sin(angle), o.height, -o.radius * std::cos(angle));
    return look_at(eye, Vec3::Zero(), Vec3(0.0, 1.0, 0.0), f, width, height, index);
}

} // namespace

std::vector<CameraModel> make_rig(RigProfile profile, int camera_count, double f, int width, int height,
                                  const RigOptions &options) {
    if (camera_count < 1) throw std::invalid_argument("make_rig: camera count must be at least 1");
    std::vector<CameraModel> rig;
    for (int i = 0; i < camera_count; ++i) {
        double angle = 0.0;
        if (profile == RigProfile::multiview_ring) {
            angle = options.ring_offset + kTwoPi * i / camera_count;
        } else {
            const double w = camera_count > 1 ? double(i) / (camera_count - 1) : 0.5;
            angle = options.arc_start + w * (options.arc_end - options.arc_start);
        }
        rig.push_back(ring_camera(angle, f, width, height, options.first_index + i, options));
    }
    return rig;
}

CameraModel held_out_camera(int camera_count, double f, int width, int height, int index,
                            const RigOptions &options) {
    const double angle = options.ring_offset + kTwoPi * (index % camera_count + 0.5) / camera_count;
    return ring_camera(angle, f, width, height, camera_count + index, options);
}

std::vector<std::pair<std::size_t, double>> rig_schedule(RigProfile profile, std::size_t camera_count,
                                                         const std::vector<double> &timesteps) {
    std::vector<std::pair<std::size_t, double>> out;
    if (profile == RigProfile::monocular_arc) {
        for (std::size_t i = 0; i < timesteps.size(); ++i) out.emplace_back(i % camera_count, timesteps[i]);
    } else {
        for (std::size_t c = 0; c < camera_count; ++c)
            for (double t : timesteps) out.emplace_back(c, t);
    }
    return out;
}

RenderedImage render_reference(const Scene &scene, const CameraModel &camera, double t, int supersample,
                               const Vec3 &background) {
    if (supersample < 1) throw std::invalid_argument("supersample factor must be at least 1");
    RenderJob job;
    job.scene = &scene;
    job.camera = camera.scaled(supersample);
    job.t = t;
    job.filter.kind = FilterKind::none;
    job.background = background;
    return box_downsample(render(job).image, supersample);
}

std::vector<GroundTruthFrame> render_ground_truth(const Scene &scene, const std::vector<CameraModel> &rig,
                                                  RigProfile profile, const std::vector<double> &timesteps,
                                                  int supersample, const Vec3 &background) {
    if (rig.empty()) throw std::invalid_argument("render_ground_truth: empty rig");
    std::vector<GroundTruthFrame> frames;
    for (const auto &[c, t] : rig_schedule(profile, rig.size(), timesteps))
        frames.push_back({rig[c].camera_index, t, render_reference(scene, rig[c], t, supersample, background)});
    return frames;
}

Scene random_initialization(int count, std::uint64_t seed, const std::vector<double> &times) {
    if (count < 1) throw std::invalid_argument("random_initialization: count must be at least 1");
    Random rng(seed);
    Scene scene;
    for (int k = 0; k < count; ++k) {
        GaussianPrimitive g;
        g.id = k;
        g.p = rng.in_box(1.0);
        g.alpha = 0.1;
        g.color = Vec3::Constant(0.5);
        scene.primitives.push_back(g);
    }
    double mean_nn = 0.0;
    for (int k = 0; k < count; ++k) {
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < count; ++j)
            if (j != k) best = std::min(best, (scene.primitives[k].p - scene.primitives[j].p).norm());
        mean_nn += std::isfinite(best) ? best : 1.0;
    }
    mean_nn /= count;
    for (auto &g : scene.primitives) g.s = Vec3::Constant(mean_nn);
    if (!times.empty()) scene.reset_tracks(times);
    return scene;
}

} // namespace afgs
