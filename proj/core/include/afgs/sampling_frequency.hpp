// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0
//
// Per-primitive minimum sampling interval T = 1 / nu (world units per pixel):
// the finest rate at which any training view observes the primitive.

#pragma once

#include "afgs/deformation.hpp"
#include "afgs/geometry.hpp"

#include <optional>
#include <span>
#include <vector>

namespace afgs {

enum class TrackerMode { static_estimate, momentum };

/// One camera observing the scene at normalized time t.
struct View {
    CameraModel camera;
    double t = 0.0;
};

/// Camera-space depth of a primitive center in one rendered view.
struct DepthSample {
    std::size_t index = 0;
    double depth = 0.0;
    bool visible = false;
};

/// min over cameras that see the primitive (at its base position) of d / f;
/// empty when no camera sees it.
std::optional<double> static_interval(const GaussianPrimitive &g,
                                      std::span<const CameraModel> cameras);

/// Exhaustive min over (camera, time) of visible d(t) / f. Test oracle.
std::optional<double> brute_force_interval(const GaussianPrimitive &g,
                                           const DeformationTrack &track,
                                           std::span<const CameraModel> cameras,
                                           std::span<const double> timesteps);
std::optional<double> brute_force_interval(const GaussianPrimitive &g,
                                           const DeformationTrack &track,
                                           std::span<const View> views);

/// Scalar momentum rule T <- (1 - lambda) T + lambda min(T, d / f).
double momentum_step(double interval, double depth_over_focal, double lambda_v);

class FrequencyTracker {
public:
    FrequencyTracker() = default;
    FrequencyTracker(double lambda_v, int switch_iteration);

    TrackerMode mode = TrackerMode::static_estimate;
    double lambda_v = 0.2;
    int switch_iteration = 6000;

    /// Enters momentum mode once `iteration` reaches the switch iteration.
    void update_mode(int iteration);

    /// Recomputes every interval from base positions (static estimate).
    void estimate_static(std::span<GaussianPrimitive> prims,
                         std::span<const CameraModel> cameras) const;

    /// Momentum update of one primitive. Returns false (and leaves the primitive
    /// unchanged) for non-positive d / f or an untracked primitive.
    bool momentum_update(GaussianPrimitive &g, double depth, double focal) const;

    /// Applies one rendered view's depth samples (visible ones only) in index order.
    void apply_view(std::span<GaussianPrimitive> prims, std::span<const DepthSample> depths,
                    double focal) const;
};

/// Median of the tracked intervals; empty if none are tracked.
std::optional<double> fallback_interval(std::span<const GaussianPrimitive> prims);

/// Interval used for filtering each primitive: its own, else the scene fallback,
/// else 0 (no frequency information, 3D filters become identities).
std::vector<double> effective_intervals(std::span<const GaussianPrimitive> prims);

} // namespace afgs
