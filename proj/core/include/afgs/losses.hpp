// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0
//
// Training objective: L = L_color + lambda_1 L_scales with
//
//   L_color  = 0.8 L1 + 0.2 (1 - SSIM)
//   L_scales = sum over axes of (rho_min sigma_s T^2 - s_t^2) M_1
//
// where M_1 is on for rho_thre sigma_s T^2 < s_t^2 < rho_min sigma_s T^2.

#pragma once

#include "afgs/filters.hpp"
#include "afgs/image.hpp"
#include "afgs/scene.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace afgs {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;
inline constexpr double kSsimWeight = 0.2;

struct SsimResult {
    double value = 1.0;
    /// dSSIM / d first image, empty unless requested.
    std::vector<double> grad;
};

/// Mean SSIM over all valid 11x11 window positions and channels. Throws
/// ImageError on mismatched sizes or images smaller than the window.
SsimResult ssim_with_gradient(const RenderedImage &a, const RenderedImage &b, bool want_gradient);

struct LossValue {
    double value = 0.0;
    /// dL / d rendered rgb.
    std::vector<double> grad;
};

LossValue color_loss(const RenderedImage &rendered, const RenderedImage &target);

enum class ScaleLossMode { sum, mean };

/// True iff rho_thre sigma_s T^2 < s2 < rho_min sigma_s T^2.
bool scale_band_active(double s2, double interval, const FilterConfig &config);

struct ScaleLossValue {
    double value = 0.0;
    /// dL_scales / d s_t per primitive.
    std::vector<Vec3> grad_st;
    std::size_t active_primitives = 0;
    std::size_t active_terms = 0;
};

/// Scale loss over primitives with include[k] set, at time t. `intervals` are the
/// per-primitive sampling intervals used by the filter.
ScaleLossValue scale_loss(const Scene &scene, double t, bool static_scene,
                          std::span<const double> intervals, const std::vector<bool> &include,
                          const FilterConfig &config, ScaleLossMode mode);

struct LossReport {
    int iteration = 0;
    double color = 0.0;
    double scale = 0.0;
    double total = 0.0;
    std::size_t active = 0;
};

} // namespace afgs
