// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/filters.hpp"

#include <Eigen/Eigenvalues>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace afgs {

std::string_view to_string(FilterKind kind) {
    switch (kind) {
    case FilterKind::none: return "none";
    case FilterKind::dilation2d: return "dilation2d";
    case FilterKind::mip2d: return "mip2d";
    case FilterKind::smoothing3d: return "smoothing3d";
    case FilterKind::adaptive4d: return "adaptive4d";
    }
    return "none";
}

std::optional<FilterKind> parse_filter_kind(std::string_view name) {
    for (auto k : {FilterKind::none, FilterKind::dilation2d, FilterKind::mip2d,
                   FilterKind::smoothing3d, FilterKind::adaptive4d})
        if (name == to_string(k)) return k;
    return std::nullopt;
}

void FilterConfig::validate() const {
    if (!(sigma_s > 0.0)) throw std::invalid_argument("filter: sigma_s must be positive");
    if (!(rho_min > 0.0 && rho_min <= rho_max))
        throw std::invalid_argument("filter: require 0 < rho_min <= rho_max");
    if (!(rho_thre >= 0.0)) throw std::invalid_argument("filter: rho_thre must be non-negative");
    if (!(epsilon > 0.0 && epsilon < rho_min))
        throw std::invalid_argument("filter: require 0 < epsilon < rho_min");
    if (!(render_rate_ratio > 0.0))
        throw std::invalid_argument("filter: render_rate_ratio must be positive");
}

double rescale_rho_min(double rho_min, double interval_ratio) {
    if (!(interval_ratio > 0.0)) throw std::invalid_argument("rescale_rho_min: ratio must be positive");
    return std::min(1.0, rho_min * interval_ratio * interval_ratio);
}

FilterConfig FilterConfig::at_render_rate(double rate_ratio) const {
    if (!(rate_ratio > 0.0)) throw std::invalid_argument("render rate ratio must be positive");
    FilterConfig out = *this;
    out.render_rate_ratio = rate_ratio;
    if (rate_ratio < 1.0) {
        out.rho_min = rescale_rho_min(rho_min, 1.0 / rate_ratio);
        out.rho_max = std::max(out.rho_max, out.rho_min);
    }
    return out;
}

namespace {

double determinant_ratio_sqrt(double det_original, double det_filtered) {
    return std::sqrt(std::max(det_original, kDeterminantFloor) /
                     std::max(det_filtered, kDeterminantFloor));
}

FilteredGaussian2D screen_filtered(const Covariance2D &cov2d, const Mat2 &cov, double norm) {
    FilteredGaussian2D out;
    out.cov = cov;
    out.normalization = norm;
    out.depth = cov2d.depth;
    out.opacity = norm;
    return out;
}

} // namespace

FilteredGaussian2D dilation2d(const Covariance2D &cov2d, double sigma_s) {
    return screen_filtered(cov2d, cov2d.cov + sigma_s * Mat2::Identity(), 1.0);
}

FilteredGaussian2D mip2d(const Covariance2D &cov2d, double sigma_s) {
    const Mat2 filtered = cov2d.cov + sigma_s * Mat2::Identity();
    return screen_filtered(cov2d, filtered,
                           determinant_ratio_sqrt(cov2d.cov.determinant(), filtered.determinant()));
}

Filtered3D smoothing3d(const Mat3 &cov, double max_frequency, double sigma_s) {
    const double add = std::isinf(max_frequency) ? 0.0 : sigma_s / (max_frequency * max_frequency);
    Filtered3D out;
    out.cov = cov + add * Mat3::Identity();
    // Eigenvalues avoid the cofactor cancellation of det() on thin primitives.
    const Vec3 lambda = Eigen::SelfAdjointEigenSolver<Mat3>(cov, Eigen::EigenvaluesOnly).eigenvalues();
    out.normalization = determinant_ratio_sqrt(lambda.prod(), (lambda.array() + add).prod());
    return out;
}

Vec3 rho_adapt(const Vec3 &scale_ratio, double rho_min, double rho_max) {
    return scale_ratio.cwiseMax(rho_min).cwiseMin(rho_max);
}

AdaptiveSigma sigma_adapt(const Vec3 &s_t, const Vec3 &rho, double max_frequency,
                          const FilterConfig &config) {
    const double threshold = std::isinf(max_frequency)
                                 ? 0.0
                                 : config.rho_thre * config.sigma_s / (max_frequency * max_frequency);
    AdaptiveSigma out;
    for (int i = 0; i < 3; ++i) {
        out.masked[i] = !(s_t[i] * s_t[i] >= threshold);
        out.sigma[i] = out.masked[i] ? config.epsilon * config.sigma_s : rho[i] * config.sigma_s;
    }
    return out;
}

AxisDilation axis_dilation(const FilterConfig &config, const Vec3 &s_t, const Vec3 &s,
                           double interval) {
    AxisDilation out;
    const double T2 = interval * interval;
    if (config.kind == FilterKind::smoothing3d) {
        out.variance.setConstant(config.sigma_s * T2);
        return out;
    }
    if (config.kind != FilterKind::adaptive4d) return out;

    const double threshold = config.rho_thre * config.sigma_s * T2;
    Vec3 sigma, dsig_dst, dsig_ds;
    for (int i = 0; i < 3; ++i) {
        dsig_dst[i] = dsig_ds[i] = 0.0;
        if (!(s_t[i] * s_t[i] >= threshold)) {
            out.masked[i] = true;
            sigma[i] = config.epsilon * config.sigma_s;
            continue;
        }
        // Band edges count as clipped, so rho_min == rho_max carries no derivative.
        const double ratio = s_t[i] * s_t[i] / (s[i] * s[i]);
        if (ratio <= config.rho_min) {
            sigma[i] = config.rho_min * config.sigma_s;
        } else if (ratio >= config.rho_max) {
            sigma[i] = config.rho_max * config.sigma_s;
        } else {
            sigma[i] = ratio * config.sigma_s;
            dsig_dst[i] = 2.0 * s_t[i] / (s[i] * s[i]) * config.sigma_s;
            dsig_ds[i] = -2.0 * s_t[i] * s_t[i] / (s[i] * s[i] * s[i]) * config.sigma_s;
        }
    }
    if (config.per_axis) {
        out.variance = sigma * T2;
        out.d_st = (dsig_dst * T2).asDiagonal();
        out.d_s = (dsig_ds * T2).asDiagonal();
    } else {
        out.variance.setConstant(sigma.mean() * T2);
        for (int j = 0; j < 3; ++j) {
            out.d_st.row(j) = dsig_dst.transpose() * (T2 / 3.0);
            out.d_s.row(j) = dsig_ds.transpose() * (T2 / 3.0);
        }
    }
    return out;
}

Filtered3D adaptive4d(const Quat &r_t, const Vec3 &s_t, const Vec3 &s, double max_frequency,
                      const FilterConfig &config) {
    FilterConfig cfg = config;
    cfg.kind = FilterKind::adaptive4d;
    const double interval = std::isinf(max_frequency) ? 0.0 : 1.0 / max_frequency;
    const AxisDilation dil = axis_dilation(cfg, s_t, s, interval);
    const Vec3 var = s_t.array().square().matrix();
    const Vec3 filtered = var + dil.variance;
    const Mat3 R = rotation_matrix(r_t);
    Filtered3D out;
    out.cov = R * filtered.asDiagonal() * R.transpose();
    out.normalization = determinant_ratio_sqrt(var.prod(), filtered.prod());
    return out;
}

} // namespace afgs
