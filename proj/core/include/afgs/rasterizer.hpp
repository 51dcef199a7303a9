// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0
//
// Tile-based CPU splatting. Primitives are deformed to the job time, filtered,
// projected, sorted by (depth, id) and blended front to back:
//
//   c(x) = sum_k c_k a_k(x) prod_{j<k} (1 - a_j(x)) + T(x) background
//   a_k(x) = min(0.99, alpha_k norm_k exp(-1/2 d^T Sigma_k^-1 d))
//
// Contributions below 1/255 are skipped and a pixel stops once its
// transmittance would fall below 1e-4.

#pragma once

#include "afgs/filters.hpp"
#include "afgs/image.hpp"
#include "afgs/sampling_frequency.hpp"
#include "afgs/scene.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace afgs {

class RenderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RenderOptions {
    double alpha_cutoff = 1.0 / 255.0;
    double max_alpha = 0.99;
    double transmittance_floor = 1e-4;
    bool early_termination = true;
    int tile_size = 16;
    /// Worker threads for tile passes; 0 picks the hardware concurrency.
    int workers = 1;
};

struct RenderJob {
    const Scene *scene = nullptr;
    CameraModel camera;
    double t = 0.0;
    FilterConfig filter;
    Vec3 background = Vec3::Zero();
    /// Ignore deformation (static warm-up renders).
    bool static_scene = false;
    RenderOptions options;
};

/// Everything the reverse pass needs about one projected primitive.
struct Splat {
    std::size_t index = 0;
    std::int64_t id = 0;
    bool culled = true;
    bool visible = false;
    bool filtered = false;
    bool contributes = false;

    DeformedState state;
    double interval = 0.0;
    Mat3 R = Mat3::Identity();
    AxisDilation dilation;
    Vec3 variance = Vec3::Zero(); // s_t^2 + object-space dilation
    double norm3 = 1.0;

    Vec3 cam_point = Vec3::Zero();
    Mat23 M = Mat23::Zero(); // J * view rotation
    Mat3 cov3 = Mat3::Identity();
    Mat2 cov2 = Mat2::Identity();
    bool cov2_clamped = false;
    bool screen_dilated = false;
    bool screen_normalized = false;
    Mat2 cov2_filtered = Mat2::Identity();
    double norm2 = 1.0;
    Mat2 conic = Mat2::Identity();

    Vec2 mean = Vec2::Zero();
    double depth = 0.0;
    double opacity = 0.0; // alpha * norm3 * norm2
    Vec3 color = Vec3::Zero();
    double extent_x = 0.0;
    double extent_y = 0.0;
};

/// Projects and filters primitive k of the job's scene.
Splat preprocess_splat(const RenderJob &job, std::size_t k, double interval);

struct ForwardState {
    RenderedImage image;
    std::vector<Splat> splats;
    /// Contributing splat indices per tile, in blending order.
    std::vector<std::vector<std::size_t>> tiles;
    int tiles_x = 0;
    int tiles_y = 0;
    std::vector<DepthSample> depths;
};

/// Full forward pass retaining per-splat intermediates.
ForwardState render_forward(const RenderJob &job);

struct RenderResult {
    RenderedImage image;
    std::vector<DepthSample> depths;
};

/// Throws RenderError if the job has no scene or any primitive holds a NaN.
RenderResult render(const RenderJob &job);

/// Renders with focal length, principal point and resolution scaled by each
/// factor; rho_min is rescaled for factors below 1.
std::vector<RenderedImage> render_multiscale(const RenderJob &job, const std::vector<double> &factors);

/// Calls fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)> &fn);

} // namespace afgs
