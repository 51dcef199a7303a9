// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/rasterizer.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <string>

namespace afgs {

const DeformationTrack &Scene::track(std::size_t k) const {
    static const DeformationTrack kEmpty;
    return k < tracks.size() ? tracks[k] : kEmpty;
}

void Scene::reset_tracks(const std::vector<double> &times) {
    tracks.assign(primitives.size(), DeformationTrack::zeros(times));
}

void Scene::validate() const {
    if (!tracks.empty() && tracks.size() != primitives.size())
        throw GeometryError("scene: track count differs from primitive count");
    for (const auto &g : primitives) {
        const std::string who = "primitive " + std::to_string(g.id);
        if (!(g.r.norm() > 0.0)) throw GeometryError(who + ": zero quaternion");
        if ((g.s.array() <= 0.0).any()) throw GeometryError(who + ": scales must be positive");
        if (!(g.alpha >= 0.0 && g.alpha <= 1.0)) throw GeometryError(who + ": opacity outside [0,1]");
        if (g.min_sampling_interval && !(*g.min_sampling_interval > 0.0))
            throw GeometryError(who + ": sampling interval must be positive");
    }
    for (const auto &tr : tracks) tr.validate();
}

namespace {

bool all_finite(const GaussianPrimitive &g) {
    return g.p.allFinite() && g.r.allFinite() && g.s.allFinite() && std::isfinite(g.alpha) &&
           g.color.allFinite() &&
           (!g.min_sampling_interval || std::isfinite(*g.min_sampling_interval));
}

bool all_finite(const DeformationTrack &track) {
    for (const auto &k : track.keyframes)
        if (!k.dp.allFinite() || !k.dr.allFinite() || !k.ds.allFinite()) return false;
    return true;
}

double sqrt_det_ratio(double det_original, double det_filtered) {
    return std::sqrt(std::max(det_original, kDeterminantFloor) /
                     std::max(det_filtered, kDeterminantFloor));
}

} // namespace

Splat preprocess_splat(const RenderJob &job, std::size_t k, double interval) {
    const Scene &scene = *job.scene;
    const GaussianPrimitive &g = scene.primitives[k];
    const DeformationTrack &track = scene.track(k);
    if (!all_finite(g) || !all_finite(track))
        throw RenderError("primitive " + std::to_string(g.id) + " has a non-finite parameter");

    Splat sp;
    sp.index = k;
    sp.id = g.id;
    sp.color = g.color;
    sp.interval = interval;
    sp.state = job.static_scene ? undeformed(g) : deform(g, track, job.t);

    const CameraModel &cam = job.camera;
    sp.cam_point = cam.view.apply(sp.state.p);
    sp.depth = sp.cam_point.z();
    if (!(sp.depth > kNearPlane)) return sp;
    sp.culled = false;

    sp.R = rotation_matrix(sp.state.r);
    sp.M = projection_jacobian(sp.cam_point, cam.f) * cam.view.rotation;
    sp.mean = Vec2(cam.f * sp.cam_point.x() / sp.depth + cam.principal_point.x(),
                   cam.f * sp.cam_point.y() / sp.depth + cam.principal_point.y());

    const Vec3 own_var = sp.state.s.array().square().matrix();
    {
        Projection unfiltered;
        unfiltered.center = sp.mean;
        unfiltered.covariance.depth = sp.depth;
        unfiltered.covariance.cov = sp.M * (sp.R * own_var.asDiagonal() * sp.R.transpose()) *
                                    sp.M.transpose();
        clamp_eigenvalues(unfiltered.covariance.cov);
        sp.visible = visible(unfiltered, cam);
    }

    const FilterConfig &fc = job.filter;
    sp.variance = own_var;
    if (fc.object_space() && sp.visible) {
        sp.filtered = true;
        sp.dilation = axis_dilation(fc, sp.state.s, g.s, interval);
        sp.variance = own_var + sp.dilation.variance;
        sp.norm3 = sqrt_det_ratio(own_var.prod(), sp.variance.prod());
    }
    sp.cov3 = sp.R * sp.variance.asDiagonal() * sp.R.transpose();
    sp.cov2 = sp.M * sp.cov3 * sp.M.transpose();
    sp.cov2 = 0.5 * (sp.cov2 + sp.cov2.transpose()).eval();
    sp.cov2_clamped = clamp_eigenvalues(sp.cov2);

    switch (fc.kind) {
    case FilterKind::none: break;
    case FilterKind::dilation2d: sp.screen_dilated = true; break;
    case FilterKind::mip2d: sp.screen_dilated = sp.screen_normalized = true; break;
    case FilterKind::smoothing3d:
    case FilterKind::adaptive4d:
        sp.screen_dilated = sp.screen_normalized = sp.visible && fc.screen_mip;
        break;
    }
    sp.cov2_filtered = sp.cov2;
    if (sp.screen_dilated) sp.cov2_filtered += fc.sigma_s * Mat2::Identity();
    if (sp.screen_normalized)
        sp.norm2 = sqrt_det_ratio(sp.cov2.determinant(), sp.cov2_filtered.determinant());
    sp.conic = sp.cov2_filtered.inverse();

    sp.opacity = g.alpha * sp.norm3 * sp.norm2;
    const double cutoff = job.options.alpha_cutoff;
    if (sp.opacity >= cutoff && sp.opacity > 0.0) {
        const double level = 2.0 * std::log(sp.opacity / cutoff);
        sp.extent_x = std::sqrt(level * sp.cov2_filtered(0, 0));
        sp.extent_y = std::sqrt(level * sp.cov2_filtered(1, 1));
        sp.contributes = true;
    }
    return sp;
}

} // namespace afgs
