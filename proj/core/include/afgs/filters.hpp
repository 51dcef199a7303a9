// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0
//
// Low-pass filters applied to Gaussians before blending.
//
//   dilation2d   screen space:  Sigma2D + sigma_s I
//   mip2d        screen space:  Sigma2D + sigma_s I, mass-preserving normalization
//   smoothing3d  object space:  Sigma + sigma_s T^2 I (T: minimum sampling interval)
//   adaptive4d   object space:  per-axis dilation rho_adapt sigma_s T^2 driven by the
//                temporal scale ratio s_t^2 / s^2, masked to epsilon sigma_s for
//                primitives whose scale falls below the rho_thre threshold
//
// The normalization factor of every mass-preserving filter is
// sqrt(|Sigma| / |Sigma + added|).

#pragma once

#include "afgs/geometry.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace afgs {

enum class FilterKind { none, dilation2d, mip2d, smoothing3d, adaptive4d };

std::string_view to_string(FilterKind kind);
std::optional<FilterKind> parse_filter_kind(std::string_view name);

/// Determinants are clamped to this before forming normalization ratios.
inline constexpr double kDeterminantFloor = 1e-30;

struct FilterConfig {
    FilterKind kind = FilterKind::adaptive4d;
    /// Dilation hyperparameter (pixel^2 in screen space).
    double sigma_s = 0.2;
    double rho_min = 0.2;
    double rho_max = 5.0;
    double rho_thre = 0.05;
    /// Dilation factor for masked (sub-threshold) axes.
    double epsilon = 1e-4;
    /// Current sampling rate divided by the training sampling rate.
    double render_rate_ratio = 1.0;
    /// adaptive4d: dilate each axis in the primitive frame (true) or add the
    /// mean of the per-axis dilations isotropically (false).
    bool per_axis = true;
    /// smoothing3d / adaptive4d are followed by the 2D mip filter.
    bool screen_mip = true;

    /// Throws std::invalid_argument on out-of-range scalars.
    void validate() const;

    [[nodiscard]] bool object_space() const {
        return kind == FilterKind::smoothing3d || kind == FilterKind::adaptive4d;
    }

    /// Copy prepared for rendering at `rate_ratio` times the training sampling
    /// rate: rho_min is raised when the rate drops.
    [[nodiscard]] FilterConfig at_render_rate(double rate_ratio) const;
};

/// rho_min <- min(1, rho_min * ratio^2), `ratio` being the sampling interval at
/// render time over the training interval (2 for a half-resolution render).
double rescale_rho_min(double rho_min, double interval_ratio);

struct FilteredGaussian2D {
    Mat2 cov = Mat2::Identity();
    double normalization = 1.0;
    Vec2 center = Vec2::Zero();
    double depth = 0.0;
    std::int64_t id = 0;
    double opacity = 1.0;
};

FilteredGaussian2D dilation2d(const Covariance2D &cov2d, double sigma_s);
FilteredGaussian2D mip2d(const Covariance2D &cov2d, double sigma_s);

struct Filtered3D {
    Mat3 cov = Mat3::Identity();
    double normalization = 1.0;
};

/// `max_frequency` is nu = 1 / T; an infinite frequency makes the filter an identity.
Filtered3D smoothing3d(const Mat3 &cov, double max_frequency, double sigma_s);

/// Elementwise clip(ratio, rho_min, rho_max).
Vec3 rho_adapt(const Vec3 &scale_ratio, double rho_min, double rho_max);

struct AdaptiveSigma {
    Vec3 sigma = Vec3::Zero();
    Eigen::Array<bool, 3, 1> masked = Eigen::Array<bool, 3, 1>::Constant(false);
};

/// Per axis: rho * sigma_s if s_t^2 >= rho_thre * sigma_s / nu^2, else epsilon * sigma_s.
AdaptiveSigma sigma_adapt(const Vec3 &s_t, const Vec3 &rho, double max_frequency,
                          const FilterConfig &config);

/// Filtered covariance of a deformed primitive with rotation r_t, scales s_t and
/// base scales s.
Filtered3D adaptive4d(const Quat &r_t, const Vec3 &s_t, const Vec3 &s, double max_frequency,
                      const FilterConfig &config);

/// Variance added along each principal axis by an object-space filter together with
/// its partial derivatives; zero for screen-space filters.
struct AxisDilation {
    Vec3 variance = Vec3::Zero();
    /// d variance_j / d s_t_i at row j, column i.
    Mat3 d_st = Mat3::Zero();
    /// d variance_j / d s_i (base scale).
    Mat3 d_s = Mat3::Zero();
    Eigen::Array<bool, 3, 1> masked = Eigen::Array<bool, 3, 1>::Constant(false);
};

/// `interval` is T (0 disables the filter).
AxisDilation axis_dilation(const FilterConfig &config, const Vec3 &s_t, const Vec3 &s,
                           double interval);

} // namespace afgs
