// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/rasterizer.hpp"

#include "blend.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace afgs {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)> &fn) {
    std::size_t count = workers > 0 ? std::size_t(workers)
                                    : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    count = std::min(count, n);
    if (count <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (std::size_t w = 0; w < count; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
}

namespace {

void check_job(const RenderJob &job) {
    if (!job.scene) throw RenderError("render job has no scene");
    job.camera.validate();
    if (job.options.tile_size < 1) throw RenderError("tile size must be positive");
    if (!(job.options.alpha_cutoff > 0.0)) throw RenderError("alpha cutoff must be positive");
    if ((job.background.array() < 0.0).any() || (job.background.array() > 1.0).any())
        throw RenderError("background color must lie in [0,1]");
}

} // namespace

ForwardState render_forward(const RenderJob &job) {
    check_job(job);
    const Scene &scene = *job.scene;
    const CameraModel &cam = job.camera;
    const int ts = job.options.tile_size;

    ForwardState st;
    st.image = RenderedImage(cam.width, cam.height);
    st.tiles_x = (cam.width + ts - 1) / ts;
    st.tiles_y = (cam.height + ts - 1) / ts;
    st.tiles.assign(std::size_t(st.tiles_x) * st.tiles_y, {});

    const std::vector<double> intervals = effective_intervals(scene.primitives);
    st.splats.resize(scene.size());
    for (std::size_t k = 0; k < scene.size(); ++k) {
        st.splats[k] = preprocess_splat(job, k, intervals[k]);
        const Splat &sp = st.splats[k];
        if (!sp.culled) st.depths.push_back({k, sp.depth, sp.visible});
    }

    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < st.splats.size(); ++k)
        if (!st.splats[k].culled && st.splats[k].contributes) order.push_back(k);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Splat &sa = st.splats[a], &sb = st.splats[b];
        if (sa.depth != sb.depth) return sa.depth < sb.depth;
        return sa.id < sb.id;
    });

    for (std::size_t k : order) {
        const Splat &sp = st.splats[k];
        // Pixel x is affected iff |x + 0.5 - mean| <= extent.
        const double x0 = std::ceil(sp.mean.x() - sp.extent_x - 0.5);
        const double x1 = std::floor(sp.mean.x() + sp.extent_x - 0.5);
        const double y0 = std::ceil(sp.mean.y() - sp.extent_y - 0.5);
        const double y1 = std::floor(sp.mean.y() + sp.extent_y - 0.5);
        if (x1 < 0.0 || y1 < 0.0 || x0 > cam.width - 1 || y0 > cam.height - 1 || x0 > x1 || y0 > y1)
            continue;
        const int tx0 = int(std::max(0.0, x0)) / ts;
        const int tx1 = int(std::min<double>(cam.width - 1, x1)) / ts;
        const int ty0 = int(std::max(0.0, y0)) / ts;
        const int ty1 = int(std::min<double>(cam.height - 1, y1)) / ts;
        for (int ty = ty0; ty <= ty1; ++ty)
            for (int tx = tx0; tx <= tx1; ++tx) st.tiles[std::size_t(ty) * st.tiles_x + tx].push_back(k);
    }

    parallel_for(st.tiles.size(), job.options.workers, [&](std::size_t tile) {
        const int tx = int(tile % st.tiles_x), ty = int(tile / st.tiles_x);
        const auto &list = st.tiles[tile];
        const int xe = std::min(cam.width, (tx + 1) * ts), ye = std::min(cam.height, (ty + 1) * ts);
        for (int y = ty * ts; y < ye; ++y) {
            for (int x = tx * ts; x < xe; ++x) {
                const auto px = detail::blend_pixel(st.splats, list, x + 0.5, y + 0.5, job.options, nullptr);
                const Vec3 c = px.color + px.transmittance * job.background;
                for (int ch = 0; ch < 3; ++ch) st.image.at(x, y, ch) = c[ch];
                st.image.transmittance[std::size_t(y) * cam.width + x] = px.transmittance;
            }
        }
    });
    return st;
}

RenderResult render(const RenderJob &job) {
    ForwardState st = render_forward(job);
    return {std::move(st.image), std::move(st.depths)};
}

std::vector<RenderedImage> render_multiscale(const RenderJob &job, const std::vector<double> &factors) {
    std::vector<RenderedImage> out;
    out.reserve(factors.size());
    for (double factor : factors) {
        if (!(factor > 0.0)) throw RenderError("scale factors must be positive");
        RenderJob scaled = job;
        scaled.camera = job.camera.scaled(factor);
        if (scaled.camera.width < 1 || scaled.camera.height < 1)
            throw RenderError("scale factor " + std::to_string(factor) + " yields an empty image");
        scaled.filter = job.filter.at_render_rate(factor * job.filter.render_rate_ratio);
        out.push_back(render(scaled).image);
    }
    return out;
}

} // namespace afgs
