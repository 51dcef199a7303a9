// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/deformation.hpp"

#include "quat_grad.hpp"

#include <algorithm>
#include <cmath>

namespace afgs {

namespace {

constexpr double kSlerpLinearThreshold = 1e-6;

} // namespace

DeformationTrack DeformationTrack::zeros(const std::vector<double> &times) {
    DeformationTrack track;
    track.times = times;
    track.keyframes.assign(times.size(), Keyframe{});
    return track;
}

void DeformationTrack::validate() const {
    if (times.size() != keyframes.size())
        throw GeometryError("deformation track: times and keyframes differ in length");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw GeometryError("deformation track: keyframe times must be strictly increasing");
    for (const auto &k : keyframes)
        if (!(k.dr.norm() > 0.0)) throw GeometryError("deformation track: zero rotation delta");
}

KeyframeBracket bracket(const std::vector<double> &times, double t) {
    KeyframeBracket b;
    if (times.empty() || t <= times.front()) return b;
    if (t >= times.back()) {
        b.lo = b.hi = times.size() - 1;
        return b;
    }
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    b.hi = static_cast<std::size_t>(it - times.begin());
    b.lo = b.hi - 1;
    b.w = (t - times[b.lo]) / (times[b.hi] - times[b.lo]);
    return b;
}

Quat slerp(const Quat &a, const Quat &b_in, double w) {
    double d = a.dot(b_in);
    const Quat b = d < 0.0 ? Quat(-b_in) : b_in;
    d = std::min(std::abs(d), 1.0);
    const double theta = std::acos(d);
    if (theta < kSlerpLinearThreshold) return ((1.0 - w) * a + w * b).normalized();
    const double s = std::sin(theta);
    return (std::sin((1.0 - w) * theta) * a + std::sin(w * theta) * b) / s;
}

Keyframe interpolate(const DeformationTrack &track, double t) {
    Keyframe out;
    if (track.empty()) return out;
    const KeyframeBracket br = bracket(track.times, t);
    const Keyframe &lo = track.keyframes[br.lo];
    const Keyframe &hi = track.keyframes[br.hi];
    out.dp = (1.0 - br.w) * lo.dp + br.w * hi.dp;
    out.ds = (1.0 - br.w) * lo.ds + br.w * hi.ds;
    out.dr = br.lo == br.hi ? quat_normalized(lo.dr)
                            : slerp(quat_normalized(lo.dr), quat_normalized(hi.dr), br.w);
    return out;
}

DeformedState deform(const GaussianPrimitive &g, const DeformationTrack &track, double t) {
    const Keyframe delta = interpolate(track, t);
    DeformedState out;
    out.p = g.p + delta.dp;
    out.r = quat_multiply(delta.dr, quat_normalized(g.r));
    const Vec3 raw = g.s + delta.ds;
    for (int i = 0; i < 3; ++i) {
        out.scale_clamped[i] = raw[i] < kScaleFloor;
        out.s[i] = std::max(raw[i], kScaleFloor);
    }
    return out;
}

DeformedState undeformed(const GaussianPrimitive &g) { return deform(g, DeformationTrack{}, 0.0); }

Vec3 scale_ratio(const GaussianPrimitive &g, const DeformationTrack &track, double t) {
    const DeformedState d = deform(g, track, t);
    return (d.s.array().square() / g.s.array().square()).matrix();
}

DeformationGradient deform_backward(const GaussianPrimitive &g, const DeformationTrack &track,
                                    double t, const Vec3 &grad_p, const Quat &grad_r,
                                    const Vec3 &grad_s) {
    DeformationGradient out;
    const Keyframe delta = interpolate(track, t);
    const Quat qn = quat_normalized(g.r);

    Vec3 gs_unclamped = grad_s;
    const Vec3 raw = g.s + delta.ds;
    for (int i = 0; i < 3; ++i)
        if (raw[i] < kScaleFloor) gs_unclamped[i] = 0.0;

    out.p = grad_p;
    out.s = gs_unclamped;
    const Quat g_qn = detail::quat_left_matrix(delta.dr).transpose() * grad_r;
    out.r = detail::normalize_backward(g.r, g_qn);

    if (track.empty()) return out;
    out.has_track = true;
    out.bracket = bracket(track.times, t);
    const double w = out.bracket.w;
    out.lo.dp = (1.0 - w) * grad_p;
    out.hi.dp = w * grad_p;
    out.lo.ds = (1.0 - w) * gs_unclamped;
    out.hi.ds = w * gs_unclamped;

    const Quat g_dr = detail::quat_right_matrix(qn).transpose() * grad_r;
    const Keyframe &klo = track.keyframes[out.bracket.lo];
    const Keyframe &khi = track.keyframes[out.bracket.hi];
    if (out.bracket.lo == out.bracket.hi) {
        out.lo.dr = detail::normalize_backward(klo.dr, g_dr);
        out.hi.dr = Quat::Zero();
    } else {
        const auto [ga, gb] =
            detail::slerp_backward(quat_normalized(klo.dr), quat_normalized(khi.dr), w, g_dr);
        out.lo.dr = detail::normalize_backward(klo.dr, ga);
        out.hi.dr = detail::normalize_backward(khi.dr, gb);
    }
    return out;
}

} // namespace afgs
