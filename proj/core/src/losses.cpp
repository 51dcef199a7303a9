// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/losses.hpp"

#include <array>
#include <cmath>

namespace afgs {

namespace {

std::array<double, kSsimWindow> gaussian_window() {
    std::array<double, kSsimWindow> w{};
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - kSsimWindow / 2;
        w[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += w[i];
    }
    for (double &v : w) v /= sum;
    return w;
}

// Plane of doubles, row-major.
struct Plane {
    int w = 0, h = 0;
    std::vector<double> v;
    Plane(int w_, int h_) : w(w_), h(h_), v(std::size_t(w_) * h_, 0.0) {}
    double &operator()(int x, int y) { return v[std::size_t(y) * w + x]; }
    double operator()(int x, int y) const { return v[std::size_t(y) * w + x]; }
};

// Valid-region separable correlation with the SSIM window.
Plane filter_valid(const Plane &in) {
    static const auto win = gaussian_window();
    const int ow = in.w - kSsimWindow + 1, oh = in.h - kSsimWindow + 1;
    Plane rows(ow, in.h);
    for (int y = 0; y < in.h; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < kSsimWindow; ++i) s += win[i] * in(x + i, y);
            rows(x, y) = s;
        }
    Plane out(ow, oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < kSsimWindow; ++i) s += win[i] * rows(x, y + i);
            out(x, y) = s;
        }
    return out;
}

// Adjoint of filter_valid.
Plane filter_adjoint(const Plane &in, int w, int h) {
    static const auto win = gaussian_window();
    Plane cols(in.w, h);
    for (int y = 0; y < in.h; ++y)
        for (int x = 0; x < in.w; ++x)
            for (int i = 0; i < kSsimWindow; ++i) cols(x, y + i) += win[i] * in(x, y);
    Plane out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < in.w; ++x)
            for (int i = 0; i < kSsimWindow; ++i) out(x + i, y) += win[i] * cols(x, y);
    return out;
}

Plane channel(const RenderedImage &img, int c) {
    Plane p(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) p(x, y) = img.at(x, y, c);
    return p;
}

Plane product(const Plane &a, const Plane &b) {
    Plane p(a.w, a.h);
    for (std::size_t i = 0; i < p.v.size(); ++i) p.v[i] = a.v[i] * b.v[i];
    return p;
}

} // namespace

SsimResult ssim_with_gradient(const RenderedImage &a, const RenderedImage &b, bool want_gradient) {
    if (!a.same_size(b)) throw ImageError("ssim: image sizes differ");
    if (a.width < kSsimWindow || a.height < kSsimWindow)
        throw ImageError("ssim: images smaller than the 11x11 window");
    const int ow = a.width - kSsimWindow + 1, oh = a.height - kSsimWindow + 1;
    const double count = 3.0 * ow * oh;

    SsimResult out;
    out.value = 0.0;
    if (want_gradient) out.grad.assign(a.rgb.size(), 0.0);
    for (int c = 0; c < 3; ++c) {
        const Plane x = channel(a, c), y = channel(b, c);
        const Plane mx = filter_valid(x), my = filter_valid(y);
        const Plane exx = filter_valid(product(x, x)), eyy = filter_valid(product(y, y));
        const Plane exy = filter_valid(product(x, y));
        Plane d_mu(ow, oh), d_var(ow, oh), d_cov(ow, oh);
        for (std::size_t i = 0; i < mx.v.size(); ++i) {
            const double ux = mx.v[i], uy = my.v[i];
            const double vx = exx.v[i] - ux * ux, vy = eyy.v[i] - uy * uy, cxy = exy.v[i] - ux * uy;
            const double a1 = 2.0 * ux * uy + kSsimC1, a2 = 2.0 * cxy + kSsimC2;
            const double n = ux * ux + uy * uy + kSsimC1, d = vx + vy + kSsimC2;
            const double s = a1 * a2 / (n * d);
            out.value += s;
            if (!want_gradient) continue;
            const double ds_dvar = -s / d;
            const double ds_dcov = 2.0 * a1 / (n * d);
            const double ds_dmu = 2.0 * uy * a2 / (n * d) - s * 2.0 * ux / n;
            d_var.v[i] = ds_dvar / count;
            d_cov.v[i] = ds_dcov / count;
            // E[x^2] and E[xy] absorb the -mu terms of the variance and covariance.
            d_mu.v[i] = (ds_dmu - 2.0 * ux * ds_dvar - uy * ds_dcov) / count;
        }
        if (!want_gradient) continue;
        const Plane gm = filter_adjoint(d_mu, a.width, a.height);
        const Plane gv = filter_adjoint(d_var, a.width, a.height);
        const Plane gc = filter_adjoint(d_cov, a.width, a.height);
        for (int py = 0; py < a.height; ++py)
            for (int px = 0; px < a.width; ++px)
                out.grad[(std::size_t(py) * a.width + px) * 3 + c] =
                    gm(px, py) + 2.0 * x(px, py) * gv(px, py) + y(px, py) * gc(px, py);
    }
    out.value /= count;
    return out;
}

LossValue color_loss(const RenderedImage &rendered, const RenderedImage &target) {
    if (!rendered.same_size(target)) throw ImageError("color loss: image sizes differ");
    const double n = double(rendered.rgb.size());
    LossValue out;
    out.grad.assign(rendered.rgb.size(), 0.0);
    double l1 = 0.0;
    for (std::size_t i = 0; i < rendered.rgb.size(); ++i) {
        const double d = rendered.rgb[i] - target.rgb[i];
        l1 += std::abs(d);
        out.grad[i] = (1.0 - kSsimWeight) * (d > 0.0 ? 1.0 : d < 0.0 ? -1.0 : 0.0) / n;
    }
    l1 /= n;
    const SsimResult s = ssim_with_gradient(rendered, target, true);
    for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] -= kSsimWeight * s.grad[i];
    out.value = (1.0 - kSsimWeight) * l1 + kSsimWeight * (1.0 - s.value);
    return out;
}

bool scale_band_active(double s2, double interval, const FilterConfig &config) {
    const double T2 = interval * interval;
    return config.rho_thre * config.sigma_s * T2 < s2 && s2 < config.rho_min * config.sigma_s * T2;
}

ScaleLossValue scale_loss(const Scene &scene, double t, bool static_scene,
                          std::span<const double> intervals, const std::vector<bool> &include,
                          const FilterConfig &config, ScaleLossMode mode) {
    ScaleLossValue out;
    out.grad_st.assign(scene.size(), Vec3::Zero());
    for (std::size_t k = 0; k < scene.size(); ++k) {
        if (k >= include.size() || !include[k]) continue;
        const GaussianPrimitive &g = scene.primitives[k];
        const DeformedState st = static_scene ? undeformed(g) : deform(g, scene.track(k), t);
        const double upper = config.rho_min * config.sigma_s * intervals[k] * intervals[k];
        bool any = false;
        for (int i = 0; i < 3; ++i) {
            const double s2 = st.s[i] * st.s[i];
            if (!scale_band_active(s2, intervals[k], config)) continue;
            any = true;
            ++out.active_terms;
            out.value += upper - s2;
            out.grad_st[k][i] = -2.0 * st.s[i];
        }
        if (any) ++out.active_primitives;
    }
    if (mode == ScaleLossMode::mean && out.active_terms > 0) {
        const double inv = 1.0 / double(out.active_terms);
        out.value *= inv;
        for (auto &gr : out.grad_st) gr *= inv;
    }
    return out;
}

} // namespace afgs
