// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/filters.hpp"
#include "afgs/geometry.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace {

using namespace afgs;

struct Input {
    Quat r;
    Vec3 s, s_t;
};

std::vector<Input> inputs(std::size_t n) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0), scale(0.01, 0.3), ratio(0.2, 5.0);
    std::vector<Input> out(n);
    for (auto &in : out) {
        in.r = Quat(u(rng), u(rng), u(rng), u(rng)).normalized();
        in.s = Vec3(scale(rng), scale(rng), scale(rng));
        in.s_t = in.s.cwiseProduct(Vec3(ratio(rng), ratio(rng), ratio(rng)));
    }
    return out;
}

void BM_Smoothing3d(benchmark::State &state) {
    const auto in = inputs(1024);
    std::size_t i = 0;
    for (auto _ : state) {
        const auto &x = in[i++ % in.size()];
        benchmark::DoNotOptimize(smoothing3d(build_covariance(x.r, x.s_t), 200.0, 0.2));
    }
}
BENCHMARK(BM_Smoothing3d);

void BM_Adaptive4d(benchmark::State &state) {
    const auto in = inputs(1024);
    FilterConfig config;
    config.kind = FilterKind::adaptive4d;
    std::size_t i = 0;
    for (auto _ : state) {
        const auto &x = in[i++ % in.size()];
        benchmark::DoNotOptimize(adaptive4d(x.r, x.s_t, x.s, 200.0, config));
    }
}
BENCHMARK(BM_Adaptive4d);

void BM_Mip2d(benchmark::State &state) {
    Covariance2D cov;
    cov.cov << 2.0, 0.3, 0.3, 1.1;
    cov.depth = 3.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mip2d(cov, 0.2));
        benchmark::ClobberMemory();
    }
}
BENCHMARK(BM_Mip2d);

} // namespace
