// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0
//
// Per-primitive keyframed deformation: p(t) = p + dp(t), r(t) = dr(t) * r,
// s(t) = max(s + ds(t), floor). dp and ds interpolate linearly, dr by slerp.

#pragma once

#include "afgs/geometry.hpp"

#include <cstddef>
#include <vector>

namespace afgs {

/// Deformed scales never drop below this value (world units).
inline constexpr double kScaleFloor = 1e-4;

struct Keyframe {
    Vec3 dp = Vec3::Zero();
    Quat dr = identity_quat();
    Vec3 ds = Vec3::Zero();
};

struct DeformationTrack {
    /// Strictly increasing normalized times in [0, 1].
    std::vector<double> times;
    std::vector<Keyframe> keyframes;

    [[nodiscard]] bool empty() const { return times.empty(); }
    [[nodiscard]] std::size_t size() const { return times.size(); }

    /// Track with zero deltas at the given times.
    static DeformationTrack zeros(const std::vector<double> &times);

    /// Throws GeometryError on unsorted times or mismatched sizes.
    void validate() const;
};

/// Keyframe pair enclosing t with the interpolation weight of `hi`.
/// Times outside the keyframe range clamp to the nearest endpoint (lo == hi).
struct KeyframeBracket {
    std::size_t lo = 0;
    std::size_t hi = 0;
    double w = 0.0;
};

KeyframeBracket bracket(const std::vector<double> &times, double t);

struct DeformedState {
    Vec3 p = Vec3::Zero();
    Quat r = identity_quat();
    Vec3 s = Vec3::Ones();
    /// Per-axis flag: s + ds(t) fell below kScaleFloor and was clamped.
    Eigen::Array<bool, 3, 1> scale_clamped = Eigen::Array<bool, 3, 1>::Constant(false);
};

/// Interpolated deltas of a track at time t (identity for an empty track).
Keyframe interpolate(const DeformationTrack &track, double t);

/// Spherical interpolation along the shorter arc between unit quaternions.
Quat slerp(const Quat &a, const Quat &b, double w);

/// The primitive's state at time t. Opacity and color are not deformed.
DeformedState deform(const GaussianPrimitive &g, const DeformationTrack &track, double t);

/// State with every delta ignored (warm-up, or scenes without motion).
DeformedState undeformed(const GaussianPrimitive &g);

/// Per-axis (s + ds(t))^2 / s^2.
Vec3 scale_ratio(const GaussianPrimitive &g, const DeformationTrack &track, double t);

/// Gradients of a scalar loss with respect to the deformation inputs.
struct DeformationGradient {
    Vec3 p = Vec3::Zero();
    Quat r = Quat::Zero();
    Vec3 s = Vec3::Zero();

    bool has_track = false;
    KeyframeBracket bracket;
    Keyframe lo{Vec3::Zero(), Quat::Zero(), Vec3::Zero()};
    Keyframe hi{Vec3::Zero(), Quat::Zero(), Vec3::Zero()};
};

/// Reverse pass of deform(): given dL/dp(t), dL/dr(t) (unit rotation) and
/// dL/ds(t), returns gradients for the base primitive and the bracketing keyframes.
/// Pass an empty track for undeformed() states.
DeformationGradient deform_backward(const GaussianPrimitive &g, const DeformationTrack &track,
                                    double t, const Vec3 &grad_p, const Quat &grad_r,
                                    const Vec3 &grad_s);

} // namespace afgs
