// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/metrics.hpp"

#include "afgs/losses.hpp"
#include "afgs/rasterizer.hpp"
#include "atomic_file.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>

namespace afgs {

double psnr(const RenderedImage &a, const RenderedImage &b) {
    if (!a.same_size(b)) throw ImageError("psnr: image sizes differ");
    if (a.rgb.empty()) throw ImageError("psnr: empty image");
    double se = 0.0;
    for (std::size_t i = 0; i < a.rgb.size(); ++i) {
        const double d = a.rgb[i] - b.rgb[i];
        se += d * d;
    }
    const double mse = se / double(a.rgb.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(mse);
}

double ssim(const RenderedImage &a, const RenderedImage &b) { return ssim_with_gradient(a, b, false).value; }

namespace {
// The FFTW planner is not reentrant.
std::mutex fftw_planner_mutex;
} // namespace

double highband_energy(const RenderedImage &img, double band_fraction) {
    if (!(band_fraction > 0.0 && band_fraction < 1.0))
        throw std::invalid_argument("highband_energy: band fraction must lie in (0,1)");
    const int w = img.width, h = img.height;
    const std::size_t n = img.pixel_count();
    if (n == 0) return 0.0;

    fftw_complex *buf = fftw_alloc_complex(n);
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex);
        plan = fftw_plan_dft_2d(h, w, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    const double cutoff = (1.0 - band_fraction) * 0.5;
    double total = 0.0, high = 0.0;
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            buf[i][0] = img.rgb[3 * i + c];
            buf[i][1] = 0.0;
        }
        fftw_execute(plan);
        for (int ky = 0; ky < h; ++ky) {
            const double fy = double(ky <= h / 2 ? ky : ky - h) / h;
            for (int kx = 0; kx < w; ++kx) {
                const double fx = double(kx <= w / 2 ? kx : kx - w) / w;
                const std::size_t i = std::size_t(ky) * w + kx;
                const double e = buf[i][0] * buf[i][0] + buf[i][1] * buf[i][1];
                total += e;
                if (std::sqrt(fx * fx + fy * fy) > cutoff) high += e;
            }
        }
    }
    {
        std::lock_guard lock(fftw_planner_mutex);
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);
    return total > 0.0 ? high / total : 0.0;
}

std::size_t covered_pixels(const RenderedImage &img) {
    std::size_t count = 0;
    for (double T : img.transmittance)
        if (1.0 - T > 0.01) ++count;
    return count;
}

std::optional<double> coverage_inflation(const Scene &scene, const CameraModel &camera, double t,
                                         const FilterConfig &filter_a, const FilterConfig &filter_b) {
    RenderJob job;
    job.scene = &scene;
    job.camera = camera;
    job.t = t;
    job.filter = filter_a;
    const std::size_t a = covered_pixels(render(job).image);
    job.filter = filter_b;
    const std::size_t b = covered_pixels(render(job).image);
    if (b == 0) return std::nullopt;
    return double(a) / double(b);
}

namespace {

std::string format_number(double v) {
    if (std::isnan(v)) return "undefined";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

std::string metrics_csv(const std::vector<MetricRow> &rows) {
    std::string out = "scene,filter,scale_factor,psnr,ssim,highband,coverage\n";
    for (const auto &r : rows) {
        out += r.scene + ',' + r.filter + ',' + format_number(r.scale_factor) + ',' + format_number(r.psnr) +
               ',' + format_number(r.ssim) + ',' + format_number(r.highband) + ',' +
               (r.coverage ? format_number(*r.coverage) : std::string("undefined")) + '\n';
    }
    return out;
}

void write_metrics_csv(const std::vector<MetricRow> &rows, const std::filesystem::path &path) {
    detail::write_file_atomically(path, metrics_csv(rows));
}

} // namespace afgs
