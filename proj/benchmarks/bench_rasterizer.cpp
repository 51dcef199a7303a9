// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/backward.hpp"
#include "afgs/metrics.hpp"
#include "afgs/rasterizer.hpp"
#include "afgs/scenes.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace afgs;

RenderJob make_job(const Scene &scene, int size, FilterKind kind) {
    RenderJob job;
    job.scene = &scene;
    job.camera = make_rig(RigProfile::multiview_ring, 4, 1.6 * size, size, size)[0];
    job.t = 0.4;
    job.filter.kind = kind;
    return job;
}

void BM_RenderForward(benchmark::State &state) {
    const Scene scene = make_scene(SceneProfile::orbiting_blobs, 1, int(state.range(0)));
    const RenderJob job = make_job(scene, int(state.range(1)), FilterKind::adaptive4d);
    for (auto _ : state) benchmark::DoNotOptimize(render(job).image.rgb.data());
    state.SetItemsProcessed(state.iterations() * state.range(1) * state.range(1));
}
BENCHMARK(BM_RenderForward)->Args({64, 64})->Args({256, 64})->Args({256, 128})->Unit(benchmark::kMillisecond);

void BM_RenderFilterKind(benchmark::State &state) {
    const Scene scene = make_scene(SceneProfile::pulsing_grid, 1, 128);
    const RenderJob job = make_job(scene, 96, FilterKind(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(render(job).image.rgb.data());
}
BENCHMARK(BM_RenderFilterKind)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

void BM_RenderBackward(benchmark::State &state) {
    const Scene scene = make_scene(SceneProfile::orbiting_blobs, 1, int(state.range(0)));
    const RenderJob job = make_job(scene, 64, FilterKind::adaptive4d);
    const ForwardState forward = render_forward(job);
    const std::vector<double> grad(forward.image.rgb.size(), 1e-3);
    for (auto _ : state) benchmark::DoNotOptimize(render_backward(job, forward, grad).all_finite());
}
BENCHMARK(BM_RenderBackward)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Ssim(benchmark::State &state) {
    const int n = int(state.range(0));
    RenderedImage a(n, n, 0.3), b(n, n, 0.6);
    for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}
BENCHMARK(BM_Ssim)->Arg(64)->Arg(256);

void BM_Highband(benchmark::State &state) {
    const int n = int(state.range(0));
    RenderedImage img(n, n);
    img.at(n / 3, n / 2, 0) = 1.0;
    for (auto _ : state) benchmark::DoNotOptimize(highband_energy(img, 0.5));
}
BENCHMARK(BM_Highband)->Arg(64)->Arg(256);

} // namespace

BENCHMARK_MAIN();
