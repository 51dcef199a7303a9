// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "afgs/filters.hpp"
#include "afgs/image.hpp"
#include "afgs/scene.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace afgs {

/// 10 log10(1 / MSE) over all channels; +infinity for identical images.
double psnr(const RenderedImage &a, const RenderedImage &b);

/// Mean 11x11 Gaussian-window SSIM (see losses.hpp).
double ssim(const RenderedImage &a, const RenderedImage &b);

/// Fraction of spectral energy (all channels, DC included in the total) at radial
/// frequency above (1 - band_fraction) x 0.5 cycles per pixel. 0 for an all-zero image.
double highband_energy(const RenderedImage &img, double band_fraction);

/// Pixels whose accumulated alpha 1 - T exceeds 0.01.
std::size_t covered_pixels(const RenderedImage &img);

/// covered_pixels(render with filter_a) / covered_pixels(render with filter_b);
/// empty when the denominator is zero.
std::optional<double> coverage_inflation(const Scene &scene, const CameraModel &camera, double t,
                                         const FilterConfig &filter_a, const FilterConfig &filter_b);

struct MetricRow {
    std::string scene;
    std::string filter;
    double scale_factor = 1.0;
    double psnr = 0.0;
    /// NaN (written as "undefined") when the image is smaller than the SSIM window.
    double ssim = 0.0;
    double highband = 0.0;
    /// Coverage relative to the reference image; empty if the reference covers nothing.
    std::optional<double> coverage;
};

/// Header plus one line per row: scene,filter,scale_factor,psnr,ssim,highband,coverage.
std::string metrics_csv(const std::vector<MetricRow> &rows);
void write_metrics_csv(const std::vector<MetricRow> &rows, const std::filesystem::path &path);

} // namespace afgs
