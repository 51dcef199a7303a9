// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0
//
// Scene fitting. Iterations before `warmup_iterations` optimize the static
// primitives with deformation frozen; afterwards primitives and keyframes are
// optimized jointly. Sampling intervals use the static estimate (refreshed every
// `static_refresh` iterations) until `switch_iteration`, then momentum updates
// from each rendered view's depths.

#pragma once

#include "afgs/adam.hpp"
#include "afgs/backward.hpp"
#include "afgs/filters.hpp"
#include "afgs/losses.hpp"
#include "afgs/rasterizer.hpp"
#include "afgs/sampling_frequency.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace afgs {

struct LearningRates {
    double position = 1.6e-4;
    double position_final = 1.6e-6;
    double rotation = 1e-3;
    double scale = 5e-3;
    double opacity = 0.05;
    double color = 2.5e-3;
    double deformation = 1.6e-4;

    /// Exponentially decayed position rate at `progress` in [0, 1].
    [[nodiscard]] double position_at(double progress) const;
};

struct TrainConfig {
    int warmup_iterations = 3000;
    int switch_iteration = 6000;
    int total_iterations = 10000;
    LearningRates lr;
    double lambda_scale = 0.1;
    ScaleLossMode scale_mode = ScaleLossMode::sum;
    double lambda_v = 0.2;
    int static_refresh = 100;
    std::uint64_t seed = 0;
    Vec3 background = Vec3::Zero();
    RenderOptions render;
    /// Halt when the loss exceeds `divergence_factor` x the first loss for
    /// `divergence_patience` consecutive iterations.
    double divergence_factor = 10.0;
    int divergence_patience = 200;

    /// Throws std::invalid_argument unless warmup < switch < total and every rate is positive.
    void validate() const;
};

struct TrainingView {
    CameraModel camera;
    double t = 0.0;
    RenderedImage target;
};

struct TrainState {
    Scene scene;
    FrequencyTracker tracker;
    Adam optimizer;
    int iteration = 0;
};

struct TrainResult {
    TrainState state;
    std::vector<LossReport> history;
    bool diverged = false;
    std::string halt_reason;
};

/// Called after each iteration; return false to stop early.
using TrainCallback = std::function<bool(const TrainState &, const LossReport &)>;

/// Fits `init` to `views`. Throws std::invalid_argument on an empty dataset or
/// invalid configuration.
TrainResult train(Scene init, const std::vector<TrainingView> &views, const FilterConfig &filter,
                  const TrainConfig &config, const TrainCallback &callback = {});

/// Continues from a checkpointed state.
TrainResult resume(TrainState state, const std::vector<TrainingView> &views, const FilterConfig &filter,
                   const TrainConfig &config, const TrainCallback &callback = {});

/// Loss and gradient of a single view (no parameter update).
struct StepResult {
    LossReport report;
    SceneGradient gradient;
    RenderResult render;
};
StepResult evaluate_step(const Scene &scene, const TrainingView &view, const FilterConfig &filter,
                         const TrainConfig &config, bool static_scene);

/// Clamps scales, opacity and color to their domains and renormalizes quaternions.
void project_parameters(Scene &scene);

} // namespace afgs
