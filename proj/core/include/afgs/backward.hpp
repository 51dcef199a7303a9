// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0
//
// Analytic reverse pass of render_forward(): blending, screen and object-space
// filtering (normalization factors included), projection, and deformation.
// The tracked sampling intervals are treated as constants.

#pragma once

#include "afgs/rasterizer.hpp"

#include <vector>

namespace afgs {

struct PrimitiveGradient {
    Vec3 p = Vec3::Zero();
    Quat r = Quat::Zero();
    Vec3 s = Vec3::Zero();
    double alpha = 0.0;
    Vec3 color = Vec3::Zero();
};

struct SceneGradient {
    std::vector<PrimitiveGradient> primitives;
    /// Same shape as Scene::tracks.
    std::vector<std::vector<Keyframe>> keyframes;

    /// Zero gradient shaped like `scene`.
    static SceneGradient zeros(const Scene &scene);

    SceneGradient &operator+=(const SceneGradient &other);
    SceneGradient &operator*=(double factor);

    [[nodiscard]] bool all_finite() const;
};

/// Chains gradients on the deformed state of primitive k at time t into `out`.
/// `static_scene` ignores the track, as in warm-up renders.
void accumulate_state_gradient(const Scene &scene, std::size_t k, double t, bool static_scene,
                               const Vec3 &grad_p, const Quat &grad_r, const Vec3 &grad_s,
                               SceneGradient &out);

/// Gradient of a loss given dL/d(rgb) of the rendered image (3 values per pixel,
/// row-major, interleaved). Throws RenderError on a non-finite result.
SceneGradient render_backward(const RenderJob &job, const ForwardState &forward,
                              const std::vector<double> &grad_rgb);

} // namespace afgs
