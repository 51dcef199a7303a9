// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace afgs {

double LearningRates::position_at(double progress) const {
    const double t = std::clamp(progress, 0.0, 1.0);
    return std::exp((1.0 - t) * std::log(position) + t * std::log(position_final));
}

void TrainConfig::validate() const {
    if (!(warmup_iterations >= 0 && warmup_iterations < switch_iteration && switch_iteration < total_iterations))
        throw std::invalid_argument("train: need warmup < switch < total iterations");
    for (double v : {lr.position, lr.position_final, lr.rotation, lr.scale, lr.opacity, lr.color, lr.deformation})
        if (!(v > 0.0)) throw std::invalid_argument("train: learning rates must be positive");
    if (!(lambda_scale >= 0.0)) throw std::invalid_argument("train: lambda_1 must be non-negative");
    if (!(lambda_v > 0.0 && lambda_v <= 1.0)) throw std::invalid_argument("train: lambda_v must lie in (0,1]");
    if (static_refresh < 1) throw std::invalid_argument("train: static refresh period must be positive");
    if (divergence_patience < 1) throw std::invalid_argument("train: divergence patience must be positive");
}

void project_parameters(Scene &scene) {
    for (auto &g : scene.primitives) {
        g.r = quat_normalized(g.r);
        g.s = g.s.cwiseMax(kScaleFloor);
        g.alpha = std::clamp(g.alpha, 0.0, 1.0);
        g.color = g.color.cwiseMax(0.0).cwiseMin(1.0);
    }
    for (auto &track : scene.tracks)
        for (auto &kf : track.keyframes) kf.dr = quat_normalized(kf.dr);
}

StepResult evaluate_step(const Scene &scene, const TrainingView &view, const FilterConfig &filter,
                         const TrainConfig &config, bool static_scene) {
    RenderJob job;
    job.scene = &scene;
    job.camera = view.camera;
    job.t = view.t;
    job.filter = filter;
    job.background = config.background;
    job.static_scene = static_scene;
    job.options = config.render;

    ForwardState fwd = render_forward(job);
    const LossValue color = color_loss(fwd.image, view.target);

    StepResult out;
    out.gradient = render_backward(job, fwd, color.grad);
    out.report.color = color.value;

    if (filter.kind == FilterKind::adaptive4d) {
        const std::vector<double> intervals = effective_intervals(scene.primitives);
        std::vector<bool> include(scene.size(), false);
        for (const Splat &sp : fwd.splats) include[sp.index] = !sp.culled && sp.visible;
        const ScaleLossValue sl =
            scale_loss(scene, view.t, static_scene, intervals, include, filter, config.scale_mode);
        out.report.scale = sl.value;
        out.report.active = sl.active_primitives;
        if (config.lambda_scale > 0.0)
            for (std::size_t k = 0; k < scene.size(); ++k)
                if (!sl.grad_st[k].isZero(0.0))
                    accumulate_state_gradient(scene, k, view.t, static_scene, Vec3::Zero(), Quat::Zero(),
                                              config.lambda_scale * sl.grad_st[k], out.gradient);
    }
    out.report.total = out.report.color + config.lambda_scale * out.report.scale;
    if (!std::isfinite(out.report.total)) throw RenderError("non-finite loss");
    out.render = {std::move(fwd.image), std::move(fwd.depths)};
    return out;
}

namespace {

constexpr double kMinOpacity = 1e-6;

void apply_updates(TrainState &st, const SceneGradient &grad, const TrainConfig &config, bool joint) {
    Scene &scene = st.scene;
    const std::size_t n = scene.size();
    const double progress = double(st.iteration) / double(config.total_iterations);
    std::vector<double> x, g;

    auto run = [&](ParamGroup group, double lr, auto &&gather, auto &&scatter) {
        x.clear();
        g.clear();
        gather();
        st.optimizer.step(group, x, g, lr);
        scatter();
    };

    std::size_t i = 0;
    run(ParamGroup::position, config.lr.position_at(progress),
        [&] {
            for (std::size_t k = 0; k < n; ++k)
                for (int c = 0; c < 3; ++c) x.push_back(scene.primitives[k].p[c]), g.push_back(grad.primitives[k].p[c]);
        },
        [&] {
            i = 0;
            for (auto &p : scene.primitives)
                for (int c = 0; c < 3; ++c) p.p[c] = x[i++];
        });
    run(ParamGroup::rotation, config.lr.rotation,
        [&] {
            for (std::size_t k = 0; k < n; ++k)
                for (int c = 0; c < 4; ++c) x.push_back(scene.primitives[k].r[c]), g.push_back(grad.primitives[k].r[c]);
        },
        [&] {
            i = 0;
            for (auto &p : scene.primitives)
                for (int c = 0; c < 4; ++c) p.r[c] = x[i++];
        });
    // Scales and opacity are stepped as log(s) and logit(alpha).
    run(ParamGroup::scale, config.lr.scale,
        [&] {
            for (std::size_t k = 0; k < n; ++k)
                for (int c = 0; c < 3; ++c) {
                    const double sv = scene.primitives[k].s[c];
                    x.push_back(std::log(sv));
                    g.push_back(grad.primitives[k].s[c] * sv);
                }
        },
        [&] {
            i = 0;
            for (auto &p : scene.primitives)
                for (int c = 0; c < 3; ++c) p.s[c] = std::exp(x[i++]);
        });
    run(ParamGroup::opacity, config.lr.opacity,
        [&] {
            for (std::size_t k = 0; k < n; ++k) {
                const double a = std::clamp(scene.primitives[k].alpha, kMinOpacity, 1.0 - kMinOpacity);
                x.push_back(std::log(a / (1.0 - a)));
                g.push_back(grad.primitives[k].alpha * a * (1.0 - a));
            }
        },
        [&] {
            i = 0;
            for (auto &p : scene.primitives) p.alpha = 1.0 / (1.0 + std::exp(-x[i++]));
        });
    run(ParamGroup::color, config.lr.color,
        [&] {
            for (std::size_t k = 0; k < n; ++k)
                for (int c = 0; c < 3; ++c) x.push_back(scene.primitives[k].color[c]), g.push_back(grad.primitives[k].color[c]);
        },
        [&] {
            i = 0;
            for (auto &p : scene.primitives)
                for (int c = 0; c < 3; ++c) p.color[c] = x[i++];
        });
    if (joint && !scene.tracks.empty()) {
        run(ParamGroup::deformation, config.lr.deformation,
            [&] {
                for (std::size_t k = 0; k < scene.tracks.size(); ++k)
                    for (std::size_t j = 0; j < scene.tracks[k].size(); ++j) {
                        const Keyframe &kf = scene.tracks[k].keyframes[j];
                        const Keyframe &kg = grad.keyframes[k][j];
                        for (int c = 0; c < 3; ++c) x.push_back(kf.dp[c]), g.push_back(kg.dp[c]);
                        for (int c = 0; c < 4; ++c) x.push_back(kf.dr[c]), g.push_back(kg.dr[c]);
                        for (int c = 0; c < 3; ++c) x.push_back(kf.ds[c]), g.push_back(kg.ds[c]);
                    }
            },
            [&] {
                i = 0;
                for (auto &track : scene.tracks)
                    for (auto &kf : track.keyframes) {
                        for (int c = 0; c < 3; ++c) kf.dp[c] = x[i++];
                        for (int c = 0; c < 4; ++c) kf.dr[c] = x[i++];
                        for (int c = 0; c < 3; ++c) kf.ds[c] = x[i++];
                    }
            });
    }
    project_parameters(scene);
}

std::vector<CameraModel> distinct_cameras(const std::vector<TrainingView> &views) {
    std::vector<CameraModel> cams;
    for (const auto &v : views) {
        const bool seen = std::any_of(cams.begin(), cams.end(), [&](const CameraModel &c) {
            return c.camera_index == v.camera.camera_index;
        });
        if (!seen) cams.push_back(v.camera);
    }
    std::sort(cams.begin(), cams.end(),
              [](const CameraModel &a, const CameraModel &b) { return a.camera_index < b.camera_index; });
    return cams;
}

} // namespace

TrainResult resume(TrainState state, const std::vector<TrainingView> &views, const FilterConfig &filter,
                   const TrainConfig &config, const TrainCallback &callback) {
    config.validate();
    filter.validate();
    if (views.empty()) throw std::invalid_argument("train: dataset is empty");
    if (state.scene.empty()) throw std::invalid_argument("train: scene has no primitives");
    state.scene.validate();

    TrainResult result;
    const std::vector<CameraModel> cameras = distinct_cameras(views);
    state.tracker.lambda_v = config.lambda_v;
    state.tracker.switch_iteration = config.switch_iteration;

    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order;
    std::size_t cursor = 0;
    // Replay the view order up to the resume point so a resumed run matches an uninterrupted one.
    auto next_view = [&] {
        if (cursor == order.size()) {
            order.resize(views.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::shuffle(order.begin(), order.end(), rng);
            cursor = 0;
        }
        return order[cursor++];
    };
    for (int it = 0; it < state.iteration; ++it) next_view();

    double initial = -1.0;
    int above = 0;
    while (state.iteration < config.total_iterations) {
        const int it = state.iteration;
        state.tracker.update_mode(it);
        if (state.tracker.mode == TrackerMode::static_estimate && it % config.static_refresh == 0)
            state.tracker.estimate_static(state.scene.primitives, cameras);

        const TrainingView &view = views[next_view()];
        const bool joint = it >= config.warmup_iterations;
        StepResult step = evaluate_step(state.scene, view, filter, config, !joint);
        step.report.iteration = it;

        if (state.tracker.mode == TrackerMode::momentum)
            state.tracker.apply_view(state.scene.primitives, step.render.depths, view.camera.f);

        apply_updates(state, step.gradient, config, joint);
        result.history.push_back(step.report);
        ++state.iteration;

        if (initial < 0.0) initial = step.report.total;
        above = step.report.total > config.divergence_factor * initial ? above + 1 : 0;
        if (above >= config.divergence_patience) {
            result.diverged = true;
            result.halt_reason = "loss above " + std::to_string(config.divergence_factor) +
                                 "x its initial value for " + std::to_string(above) + " iterations";
            break;
        }
        if (callback && !callback(state, step.report)) break;
    }
    result.state = std::move(state);
    return result;
}

TrainResult train(Scene init, const std::vector<TrainingView> &views, const FilterConfig &filter,
                  const TrainConfig &config, const TrainCallback &callback) {
    TrainState state;
    state.scene = std::move(init);
    state.tracker = FrequencyTracker(config.lambda_v, config.switch_iteration);
    return resume(std::move(state), views, filter, config, callback);
}

} // namespace afgs
