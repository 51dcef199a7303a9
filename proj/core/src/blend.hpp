// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0
//
// Per-pixel front-to-back compositing shared by the forward and reverse passes.

#pragma once

#include "afgs/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace afgs::detail {

struct Contribution {
    std::size_t splat = 0;
    std::size_t slot = 0;       // position in the tile list
    double alpha = 0.0;         // a_k after clamping
    double gaussian = 0.0;      // exp(power)
    double transmittance = 0.0; // T before this splat
    bool saturated = false;     // a_k hit max_alpha
};

struct PixelResult {
    Vec3 color = Vec3::Zero();
    double transmittance = 1.0;
};

/// Blends the tile list at pixel center (px, py). When `record` is non-null the
/// accepted contributions are appended to it in blending order.
inline PixelResult blend_pixel(const std::vector<Splat> &splats, const std::vector<std::size_t> &list,
                               double px, double py, const RenderOptions &opts,
                               std::vector<Contribution> *record) {
    PixelResult out;
    double T = 1.0;
    for (std::size_t slot = 0; slot < list.size(); ++slot) {
        const std::size_t idx = list[slot];
        const Splat &sp = splats[idx];
        const double dx = px - sp.mean.x();
        const double dy = py - sp.mean.y();
        if (std::abs(dx) > sp.extent_x || std::abs(dy) > sp.extent_y) continue;
        const double power =
            -0.5 * (sp.conic(0, 0) * dx * dx + 2.0 * sp.conic(0, 1) * dx * dy + sp.conic(1, 1) * dy * dy);
        if (power > 0.0) continue;
        const double G = std::exp(power);
        const double raw = sp.opacity * G;
        const bool saturated = raw > opts.max_alpha;
        const double a = saturated ? opts.max_alpha : raw;
        if (a < opts.alpha_cutoff) continue;
        const double next_T = T * (1.0 - a);
        if (opts.early_termination && next_T < opts.transmittance_floor) break;
        out.color += sp.color * (a * T);
        if (record) record->push_back({idx, slot, a, G, T, saturated});
        T = next_T;
    }
    out.transmittance = T;
    return out;
}

} // namespace afgs::detail
