// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/sampling_frequency.hpp"

#include <algorithm>
#include <stdexcept>

namespace afgs {

namespace {

std::optional<double> min_opt(std::optional<double> a, double b) {
    return a ? std::min(*a, b) : b;
}

std::optional<double> observed_ratio(const Vec3 &center, const Mat3 &cov, const CameraModel &cam) {
    const auto proj = project_covariance(center, cov, cam);
    if (!proj || !visible(*proj, cam)) return std::nullopt;
    return proj->covariance.depth / cam.f;
}

} // namespace

std::optional<double> static_interval(const GaussianPrimitive &g,
                                      std::span<const CameraModel> cameras) {
    const Mat3 cov = build_covariance(quat_normalized(g.r), g.s);
    std::optional<double> best;
    for (const auto &cam : cameras)
        if (const auto r = observed_ratio(g.p, cov, cam)) best = min_opt(best, *r);
    return best;
}

std::optional<double> brute_force_interval(const GaussianPrimitive &g,
                                           const DeformationTrack &track,
                                           std::span<const CameraModel> cameras,
                                           std::span<const double> timesteps) {
    std::vector<View> views;
    for (const auto &cam : cameras)
        for (double t : timesteps) views.push_back({cam, t});
    return brute_force_interval(g, track, views);
}

std::optional<double> brute_force_interval(const GaussianPrimitive &g,
                                           const DeformationTrack &track,
                                           std::span<const View> views) {
    std::optional<double> best;
    for (const auto &v : views) {
        const DeformedState d = deform(g, track, v.t);
        const Mat3 cov = build_covariance(d.r, d.s);
        if (const auto r = observed_ratio(d.p, cov, v.camera)) best = min_opt(best, *r);
    }
    return best;
}

double momentum_step(double interval, double depth_over_focal, double lambda_v) {
    // Same as (1 - lambda) T + lambda min(T, d / f), but exactly T when the min saturates.
    return interval + lambda_v * (std::min(interval, depth_over_focal) - interval);
}

FrequencyTracker::FrequencyTracker(double lambda, int switch_iter)
    : lambda_v(lambda), switch_iteration(switch_iter) {
    if (!(lambda_v > 0.0 && lambda_v <= 1.0))
        throw std::invalid_argument("frequency tracker: lambda_v must lie in (0, 1]");
}

void FrequencyTracker::update_mode(int iteration) {
    mode = iteration >= switch_iteration ? TrackerMode::momentum : TrackerMode::static_estimate;
}

void FrequencyTracker::estimate_static(std::span<GaussianPrimitive> prims,
                                       std::span<const CameraModel> cameras) const {
    for (auto &g : prims) g.min_sampling_interval = static_interval(g, cameras);
}

bool FrequencyTracker::momentum_update(GaussianPrimitive &g, double depth, double focal) const {
    if (!g.min_sampling_interval || !(focal > 0.0)) return false;
    const double ratio = depth / focal;
    if (!(ratio > 0.0)) return false;
    g.min_sampling_interval = momentum_step(*g.min_sampling_interval, ratio, lambda_v);
    return true;
}

void FrequencyTracker::apply_view(std::span<GaussianPrimitive> prims,
                                  std::span<const DepthSample> depths, double focal) const {
    for (const auto &d : depths) {
        if (!d.visible || d.index >= prims.size()) continue;
        auto &g = prims[d.index];
        // A primitive first seen in momentum mode starts from its observation.
        if (!g.min_sampling_interval && d.depth > 0.0 && focal > 0.0)
            g.min_sampling_interval = d.depth / focal;
        else
            momentum_update(g, d.depth, focal);
    }
}

std::optional<double> fallback_interval(std::span<const GaussianPrimitive> prims) {
    std::vector<double> tracked;
    for (const auto &g : prims)
        if (g.min_sampling_interval) tracked.push_back(*g.min_sampling_interval);
    if (tracked.empty()) return std::nullopt;
    const std::size_t mid = tracked.size() / 2;
    std::nth_element(tracked.begin(), tracked.begin() + mid, tracked.end());
    if (tracked.size() % 2 == 1) return tracked[mid];
    const double upper = tracked[mid];
    const double lower = *std::max_element(tracked.begin(), tracked.begin() + mid);
    return 0.5 * (lower + upper);
}

std::vector<double> effective_intervals(std::span<const GaussianPrimitive> prims) {
    const double fallback = fallback_interval(prims).value_or(0.0);
    std::vector<double> out;
    out.reserve(prims.size());
    for (const auto &g : prims) out.push_back(g.min_sampling_interval.value_or(fallback));
    return out;
}

} // namespace afgs
