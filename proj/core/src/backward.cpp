// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/backward.hpp"

#include "blend.hpp"
#include "quat_grad.hpp"

#include <Eigen/LU>

#include <cmath>
#include <string>

namespace afgs {

SceneGradient SceneGradient::zeros(const Scene &scene) {
    SceneGradient g;
    g.primitives.assign(scene.size(), {});
    g.keyframes.resize(scene.tracks.size());
    for (std::size_t k = 0; k < scene.tracks.size(); ++k)
        g.keyframes[k].assign(scene.tracks[k].size(), Keyframe{Vec3::Zero(), Quat::Zero(), Vec3::Zero()});
    return g;
}

SceneGradient &SceneGradient::operator+=(const SceneGradient &o) {
    for (std::size_t k = 0; k < primitives.size(); ++k) {
        auto &a = primitives[k];
        const auto &b = o.primitives[k];
        a.p += b.p;
        a.r += b.r;
        a.s += b.s;
        a.alpha += b.alpha;
        a.color += b.color;
    }
    for (std::size_t k = 0; k < keyframes.size(); ++k)
        for (std::size_t j = 0; j < keyframes[k].size(); ++j) {
            keyframes[k][j].dp += o.keyframes[k][j].dp;
            keyframes[k][j].dr += o.keyframes[k][j].dr;
            keyframes[k][j].ds += o.keyframes[k][j].ds;
        }
    return *this;
}

SceneGradient &SceneGradient::operator*=(double f) {
    for (auto &a : primitives) {
        a.p *= f;
        a.r *= f;
        a.s *= f;
        a.alpha *= f;
        a.color *= f;
    }
    for (auto &track : keyframes)
        for (auto &kf : track) {
            kf.dp *= f;
            kf.dr *= f;
            kf.ds *= f;
        }
    return *this;
}

bool SceneGradient::all_finite() const {
    for (const auto &a : primitives)
        if (!a.p.allFinite() || !a.r.allFinite() || !a.s.allFinite() || !std::isfinite(a.alpha) ||
            !a.color.allFinite())
            return false;
    for (const auto &track : keyframes)
        for (const auto &kf : track)
            if (!kf.dp.allFinite() || !kf.dr.allFinite() || !kf.ds.allFinite()) return false;
    return true;
}

void accumulate_state_gradient(const Scene &scene, std::size_t k, double t, bool static_scene,
                               const Vec3 &grad_p, const Quat &grad_r, const Vec3 &grad_s,
                               SceneGradient &out) {
    static const DeformationTrack kNoTrack;
    const DeformationTrack &track = static_scene ? kNoTrack : scene.track(k);
    const DeformationGradient dg = deform_backward(scene.primitives[k], track, t, grad_p, grad_r, grad_s);
    PrimitiveGradient &pg = out.primitives[k];
    pg.p += dg.p;
    pg.r += dg.r;
    pg.s += dg.s;
    if (!dg.has_track) return;
    auto &kfs = out.keyframes[k];
    auto add = [](Keyframe &dst, const Keyframe &src) {
        dst.dp += src.dp;
        dst.dr += src.dr;
        dst.ds += src.ds;
    };
    add(kfs[dg.bracket.lo], dg.lo);
    if (dg.bracket.hi != dg.bracket.lo) add(kfs[dg.bracket.hi], dg.hi);
}

namespace {

struct ScreenGrad {
    Vec2 mean = Vec2::Zero();
    Mat2 conic = Mat2::Zero();
    double opacity = 0.0;
    Vec3 color = Vec3::Zero();

    ScreenGrad &operator+=(const ScreenGrad &o) {
        mean += o.mean;
        conic += o.conic;
        opacity += o.opacity;
        color += o.color;
        return *this;
    }
};

bool determinants_floored(const Splat &sp) {
    return sp.cov2.determinant() < kDeterminantFloor ||
           sp.cov2_filtered.determinant() < kDeterminantFloor;
}

// Screen-space gradients of one splat back to its deformed state and base scale.
void splat_backward(const RenderJob &job, const Splat &sp, const ScreenGrad &sg, SceneGradient &out) {
    const Scene &scene = *job.scene;
    const GaussianPrimitive &g = scene.primitives[sp.index];
    const CameraModel &cam = job.camera;

    PrimitiveGradient &pg = out.primitives[sp.index];
    pg.color += sg.color;
    pg.alpha += sg.opacity * sp.norm3 * sp.norm2;
    const double g_norm3 = sg.opacity * g.alpha * sp.norm2;
    const double g_norm2 = sg.opacity * g.alpha * sp.norm3;

    // conic = cov2_filtered^-1
    Mat2 g_cov2 = -sp.conic * sg.conic * sp.conic;
    if (sp.screen_normalized && !determinants_floored(sp))
        g_cov2 += g_norm2 * sp.norm2 * 0.5 * (sp.cov2.inverse() - sp.cov2_filtered.inverse());
    g_cov2 = 0.5 * (g_cov2 + g_cov2.transpose()).eval();

    // cov2 = M cov3 M^T, M = J W
    const Mat3 g_cov3 = sp.M.transpose() * g_cov2 * sp.M;
    const Mat23 g_M = 2.0 * g_cov2 * sp.M * sp.cov3;
    const Mat23 g_J = g_M * cam.view.rotation.transpose();

    const Vec3 &tc = sp.cam_point;
    const double f = cam.f, iz = 1.0 / tc.z(), iz2 = iz * iz, iz3 = iz2 * iz;
    Vec3 g_tc;
    g_tc.x() = -f * iz2 * g_J(0, 2) + f * iz * sg.mean.x();
    g_tc.y() = -f * iz2 * g_J(1, 2) + f * iz * sg.mean.y();
    g_tc.z() = -f * iz2 * (g_J(0, 0) + g_J(1, 1)) + 2.0 * f * iz3 * (tc.x() * g_J(0, 2) + tc.y() * g_J(1, 2)) -
               f * iz2 * (tc.x() * sg.mean.x() + tc.y() * sg.mean.y());
    const Vec3 g_pt = cam.view.rotation.transpose() * g_tc;

    // cov3 = R diag(D) R^T
    const Mat3 g_R = 2.0 * g_cov3 * sp.R * sp.variance.asDiagonal();
    Vec3 g_D = (sp.R.transpose() * g_cov3 * sp.R).diagonal();
    const Vec3 &st = sp.state.s;
    Vec3 g_st = Vec3::Zero();
    Vec3 g_base_s = Vec3::Zero();
    if (sp.filtered) {
        if (sp.variance.prod() >= kDeterminantFloor && st.array().square().prod() >= kDeterminantFloor) {
            g_st += (g_norm3 * sp.norm3) * st.cwiseInverse();
            g_D -= (0.5 * g_norm3 * sp.norm3) * sp.variance.cwiseInverse();
        }
        g_st += sp.dilation.d_st.transpose() * g_D;
        g_base_s += sp.dilation.d_s.transpose() * g_D;
    }
    g_st += 2.0 * st.cwiseProduct(g_D);

    const Quat g_rt = detail::rotation_backward(sp.state.r, g_R);
    accumulate_state_gradient(scene, sp.index, job.t, job.static_scene, g_pt, g_rt, g_st, out);
    pg.s += g_base_s;
}

} // namespace

SceneGradient render_backward(const RenderJob &job, const ForwardState &fwd,
                              const std::vector<double> &grad_rgb) {
    const CameraModel &cam = job.camera;
    if (grad_rgb.size() != fwd.image.rgb.size())
        throw RenderError("image gradient size does not match the render");
    const int ts = job.options.tile_size;

    std::vector<std::vector<ScreenGrad>> partial(fwd.tiles.size());
    parallel_for(fwd.tiles.size(), job.options.workers, [&](std::size_t tile) {
        const auto &list = fwd.tiles[tile];
        auto &acc = partial[tile];
        acc.assign(list.size(), {});
        if (list.empty()) return;
        const int tx = int(tile % fwd.tiles_x), ty = int(tile / fwd.tiles_x);
        const int xe = std::min(cam.width, (tx + 1) * ts), ye = std::min(cam.height, (ty + 1) * ts);
        std::vector<detail::Contribution> rec;
        for (int y = ty * ts; y < ye; ++y) {
            for (int x = tx * ts; x < xe; ++x) {
                const std::size_t pix = std::size_t(y) * cam.width + x;
                const Vec3 gC(grad_rgb[3 * pix], grad_rgb[3 * pix + 1], grad_rgb[3 * pix + 2]);
                if (gC.isZero(0.0)) continue;
                rec.clear();
                const double px = x + 0.5, py = y + 0.5;
                const auto res = detail::blend_pixel(fwd.splats, list, px, py, job.options, &rec);
                // Radiance behind the current splat, already attenuated to the pixel.
                Vec3 behind = res.transmittance * job.background;
                for (auto it = rec.rbegin(); it != rec.rend(); ++it) {
                    const Splat &sp = fwd.splats[it->splat];
                    ScreenGrad &sg = acc[it->slot];
                    const double a = it->alpha, T = it->transmittance;
                    sg.color += gC * (a * T);
                    const double g_a = gC.dot(sp.color * T - behind / (1.0 - a));
                    behind += sp.color * (a * T);
                    if (it->saturated) continue;
                    sg.opacity += g_a * it->gaussian;
                    const double g_power = g_a * sp.opacity * it->gaussian;
                    const Vec2 d(px - sp.mean.x(), py - sp.mean.y());
                    sg.mean += g_power * (sp.conic * d);
                    sg.conic += (-0.5 * g_power) * (d * d.transpose());
                }
            }
        }
    });

    std::vector<ScreenGrad> screen(fwd.splats.size());
    for (std::size_t tile = 0; tile < fwd.tiles.size(); ++tile)
        for (std::size_t slot = 0; slot < fwd.tiles[tile].size(); ++slot)
            screen[fwd.tiles[tile][slot]] += partial[tile][slot];

    SceneGradient out = SceneGradient::zeros(*job.scene);
    for (const Splat &sp : fwd.splats) {
        if (sp.culled || !sp.contributes) continue;
        splat_backward(job, sp, screen[sp.index], out);
        const PrimitiveGradient &pg = out.primitives[sp.index];
        if (!pg.p.allFinite() || !pg.r.allFinite() || !pg.s.allFinite() || !std::isfinite(pg.alpha))
            throw RenderError("non-finite gradient at primitive " + std::to_string(sp.id));
    }
    if (!out.all_finite()) throw RenderError("non-finite gradient in deformation keyframes");
    return out;
}

} // namespace afgs
