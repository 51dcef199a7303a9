// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/adam.hpp"
#include "afgs/metrics.hpp"
#include "afgs/train.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace afgs {
namespace {

using testing::Rng;

TEST(Adam, MatchesReferenceRecurrence) {
    Adam adam;
    std::vector<double> params = {1.0, -2.0, 0.5};
    const std::vector<std::vector<double>> grads = {{0.3, -1.0, 0.0}, {0.1, 2.0, -0.5}, {-0.2, 0.4, 0.1}};
    std::vector<double> x = params, m(3, 0.0), v(3, 0.0);
    const double lr = 0.01;
    for (std::size_t step = 0; step < grads.size(); ++step) {
        adam.step(ParamGroup::position, params, grads[step], lr);
        const double t = double(step + 1);
        for (int i = 0; i < 3; ++i) {
            m[i] = 0.9 * m[i] + 0.1 * grads[step][i];
            v[i] = 0.999 * v[i] + 0.001 * grads[step][i] * grads[step][i];
            const double mh = m[i] / (1 - std::pow(0.9, t)), vh = v[i] / (1 - std::pow(0.999, t));
            x[i] -= lr * mh / (std::sqrt(vh) + adam.epsilon);
        }
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(params[i], x[i], 1e-14);
    }
    EXPECT_EQ(adam.moments(ParamGroup::position).steps, 3);
    EXPECT_EQ(adam.moments(ParamGroup::color).steps, 0);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    Adam adam;
    std::vector<double> p = {0.0, 0.0};
    const std::vector<double> g = {5.0, -1e-3};
    adam.step(ParamGroup::scale, p, g, 0.1);
    EXPECT_NEAR(p[0], -0.1, 1e-12);
    EXPECT_NEAR(p[1], 0.1, 1e-9);
}

TEST(Adam, RejectsSizeChange) {
    Adam adam;
    std::vector<double> p(3, 0.0), g(3, 1.0);
    adam.step(ParamGroup::color, p, g, 0.1);
    std::vector<double> p2(4, 0.0), g2(4, 1.0);
    EXPECT_THROW(adam.step(ParamGroup::color, p2, g2, 0.1), std::invalid_argument);
}

TEST(LearningRates, PositionDecaysExponentially) {
    LearningRates lr;
    lr.position = 1e-2;
    lr.position_final = 1e-4;
    EXPECT_NEAR(lr.position_at(0.0), 1e-2, 1e-15);
    EXPECT_NEAR(lr.position_at(1.0), 1e-4, 1e-15);
    EXPECT_NEAR(lr.position_at(0.5), 1e-3, 1e-14);
}

TEST(TrainConfig, ValidateSchedule) {
    TrainConfig c;
    EXPECT_NO_THROW(c.validate());
    c.warmup_iterations = c.switch_iteration;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = TrainConfig{};
    c.lr.color = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

struct Fixture {
    Scene truth;
    std::vector<TrainingView> views;
};

Fixture small_fixture(int size = 24) {
    Fixture f;
    GaussianPrimitive g;
    g.p = Vec3(0.05, -0.03, 0.0);
    g.s = Vec3(0.35, 0.25, 0.3);
    g.r = quat_from_axis_angle(Vec3::UnitZ(), 0.4);
    g.alpha = 0.9;
    g.color = Vec3(0.9, 0.4, 0.2);
    f.truth.primitives.push_back(g);
    f.truth.reset_tracks({0.0, 1.0});
    for (int c = 0; c < 2; ++c) {
        const double a = 0.4 * c;
        const CameraModel cam = look_at(Vec3(4 * std::sin(a), 0, -4 * std::cos(a)), Vec3::Zero(), Vec3(0, 1, 0),
                                        1.4 * size, size, size, c);
        for (double t : {0.0, 1.0}) {
            RenderJob job;
            job.scene = &f.truth;
            job.camera = cam;
            job.t = t;
            job.filter.kind = FilterKind::none;
            f.views.push_back({cam, t, render(job).image});
        }
    }
    return f;
}

TrainConfig short_config(int total) {
    TrainConfig c;
    c.total_iterations = total;
    c.warmup_iterations = total / 5;
    c.switch_iteration = total / 2;
    c.static_refresh = 10;
    c.lr.position = 5e-3;
    c.lr.position_final = 5e-5;
    c.lr.deformation = 1e-3;
    c.seed = 3;
    return c;
}

Scene perturbed_start(const Scene &truth) {
    Scene s = truth;
    auto &g = s.primitives[0];
    g.p += Vec3(0.1, 0.08, 0.0);
    g.s *= 0.7;
    g.color = Vec3::Constant(0.5);
    g.alpha = 0.5;
    return s;
}

TEST(Train, Deterministic) {
    const Fixture f = small_fixture();
    FilterConfig filter;
    filter.kind = FilterKind::adaptive4d;
    const TrainConfig c = short_config(60);
    const TrainResult a = train(perturbed_start(f.truth), f.views, filter, c);
    const TrainResult b = train(perturbed_start(f.truth), f.views, filter, c);
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) EXPECT_EQ(a.history[i].total, b.history[i].total);
    EXPECT_EQ(a.state.scene.primitives[0].p, b.state.scene.primitives[0].p);
    EXPECT_EQ(a.state.scene.primitives[0].min_sampling_interval, b.state.scene.primitives[0].min_sampling_interval);
}

TEST(Train, WorkerCountDoesNotChangeResult) {
    const Fixture f = small_fixture();
    FilterConfig filter;
    filter.kind = FilterKind::mip2d;
    TrainConfig c = short_config(30);
    const TrainResult a = train(perturbed_start(f.truth), f.views, filter, c);
    c.render.workers = 3;
    const TrainResult b = train(perturbed_start(f.truth), f.views, filter, c);
    EXPECT_EQ(a.state.scene.primitives[0].s, b.state.scene.primitives[0].s);
}

TEST(Train, SingleGaussianSelfFit) {
    const Fixture f = small_fixture(32);
    FilterConfig filter;
    filter.kind = FilterKind::none;
    const TrainResult r = train(perturbed_start(f.truth), f.views, filter, short_config(600));
    ASSERT_FALSE(r.diverged);
    EXPECT_LT(r.history.back().total, 0.5 * r.history.front().total);
    double worst = std::numeric_limits<double>::infinity();
    for (const auto &v : f.views) {
        RenderJob job;
        job.scene = &r.state.scene;
        job.camera = v.camera;
        job.t = v.t;
        job.filter = filter;
        worst = std::min(worst, psnr(render(job).image, v.target));
    }
    EXPECT_GE(worst, 30.0);
}

TEST(Train, DivergenceGuardHalts) {
    const Fixture f = small_fixture();
    FilterConfig filter;
    filter.kind = FilterKind::none;
    TrainConfig c = short_config(200);
    // Every loss exceeds 1e-3 of the first, so the guard trips after the patience window.
    c.divergence_factor = 1e-3;
    c.divergence_patience = 5;
    const TrainResult r = train(perturbed_start(f.truth), f.views, filter, c);
    EXPECT_TRUE(r.diverged);
    EXPECT_FALSE(r.halt_reason.empty());
    EXPECT_LT(r.history.size(), 200u);
}

TEST(Train, CallbackCanStop) {
    const Fixture f = small_fixture();
    FilterConfig filter;
    filter.kind = FilterKind::none;
    int calls = 0;
    const TrainResult r = train(perturbed_start(f.truth), f.views, filter, short_config(100),
                                [&](const TrainState &, const LossReport &) { return ++calls < 7; });
    EXPECT_EQ(calls, 7);
    EXPECT_EQ(r.history.size(), 7u);
    EXPECT_FALSE(r.diverged);
}

TEST(Train, ResumeContinuesTheSameRun) {
    const Fixture f = small_fixture();
    FilterConfig filter;
    filter.kind = FilterKind::adaptive4d;
    const TrainConfig c = short_config(40);
    const TrainResult full = train(perturbed_start(f.truth), f.views, filter, c);
    int calls = 0;
    TrainResult half = train(perturbed_start(f.truth), f.views, filter, c,
                             [&](const TrainState &, const LossReport &) { return ++calls < 20; });
    const TrainResult rest = resume(half.state, f.views, filter, c);
    EXPECT_EQ(rest.state.iteration, full.state.iteration);
    EXPECT_EQ(rest.state.scene.primitives[0].p, full.state.scene.primitives[0].p);
    EXPECT_EQ(rest.history.back().total, full.history.back().total);
}

TEST(Train, RejectsEmptyDataset) {
    EXPECT_THROW(train(Scene{}, {}, FilterConfig{}, short_config(10)), std::invalid_argument);
}

TEST(ProjectParameters, ClampsToDomains) {
    Scene s;
    GaussianPrimitive g;
    g.r = Quat(2, 0, 0, 0);
    g.s = Vec3(-1, 0.5, 0.5);
    g.alpha = 1.7;
    g.color = Vec3(-0.2, 0.5, 3);
    s.primitives.push_back(g);
    project_parameters(s);
    const auto &p = s.primitives[0];
    EXPECT_NEAR(p.r.norm(), 1.0, 1e-12);
    EXPECT_GT(p.s.minCoeff(), 0.0);
    EXPECT_LE(p.alpha, 1.0);
    EXPECT_GE(p.color.minCoeff(), 0.0);
    EXPECT_LE(p.color.maxCoeff(), 1.0);
}

} // namespace
} // namespace afgs
