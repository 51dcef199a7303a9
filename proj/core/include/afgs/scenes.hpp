// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0
//
// Procedural dynamic scenes inside [-1, 1]^3 and the camera rigs that observe them.

#pragma once

#include "afgs/image.hpp"
#include "afgs/scene.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace afgs {

enum class SceneProfile { orbiting_blobs, pulsing_grid, thin_structures };
enum class RigProfile { monocular_arc, multiview_ring };

std::string_view to_string(SceneProfile p);
std::string_view to_string(RigProfile p);
std::optional<SceneProfile> parse_scene_profile(std::string_view name);
std::optional<RigProfile> parse_rig_profile(std::string_view name);

/// Scale amplitude of pulsing_grid: s_t = s * kPulseAmplitude^sin(2 pi t + phase).
inline constexpr double kPulseAmplitude = 5.0;

/// Keyframe times of the ground-truth tracks (j / 32).
std::vector<double> ground_truth_keyframe_times();

/// `count` evenly spaced times covering [0, 1] (a single 0 for count 1).
std::vector<double> default_timesteps(int count = 8);

/// Deterministic in (profile, seed, count). Throws std::invalid_argument for count < 1.
Scene make_scene(SceneProfile profile, std::uint64_t seed, int count);

struct RigOptions {
    double radius = 4.0;
    double height = 1.0;
    /// monocular_arc endpoints, radians about the vertical axis.
    double arc_start = -1.0471975511965976;
    double arc_end = 1.0471975511965976;
    /// multiview_ring: angle of camera 0.
    double ring_offset = 0.0;
    int first_index = 0;
};

/// Cameras aimed at the origin. Throws std::invalid_argument for count < 1.
std::vector<CameraModel> make_rig(RigProfile profile, int camera_count, double f, int width, int height,
                                  const RigOptions &options = {});

/// Ring camera halfway between cameras `i` and `i + 1` of a `camera_count` ring.
CameraModel held_out_camera(int camera_count, double f, int width, int height, int index,
                            const RigOptions &options = {});

struct GroundTruthFrame {
    int camera_index = 0;
    double t = 0.0;
    RenderedImage image;
};

/// (camera, time) pairs of a rig: monocular takes camera i % count at timestep i,
/// multiview takes every camera at every timestep.
std::vector<std::pair<std::size_t, double>> rig_schedule(RigProfile profile, std::size_t camera_count,
                                                         const std::vector<double> &timesteps);

/// Renders with no filter at `supersample` x resolution and box-downsamples.
RenderedImage render_reference(const Scene &scene, const CameraModel &camera, double t, int supersample,
                               const Vec3 &background = Vec3::Zero());

std::vector<GroundTruthFrame> render_ground_truth(const Scene &scene, const std::vector<CameraModel> &rig,
                                                  RigProfile profile, const std::vector<double> &timesteps,
                                                  int supersample, const Vec3 &background = Vec3::Zero());

/// Fitting start point: positions uniform in [-1,1]^3, isotropic scale equal to the
/// mean nearest-neighbour distance, opacity 0.1, grey color, zero tracks at `times`.
Scene random_initialization(int count, std::uint64_t seed, const std::vector<double> &times);

} // namespace afgs
