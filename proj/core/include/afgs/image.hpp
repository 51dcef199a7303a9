// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace afgs {

class ImageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Row-major linear RGB image with per-pixel final transmittance.
struct RenderedImage {
    int width = 0;
    int height = 0;
    std::vector<double> rgb;           // 3 * width * height
    std::vector<double> transmittance; // width * height

    RenderedImage() = default;
    RenderedImage(int w, int h, double fill = 0.0)
        : width(w), height(h), rgb(std::size_t(3) * w * h, fill), transmittance(std::size_t(w) * h, 1.0) {}

    [[nodiscard]] std::size_t pixel_count() const { return std::size_t(width) * height; }
    [[nodiscard]] double &at(int x, int y, int c) { return rgb[(std::size_t(y) * width + x) * 3 + c]; }
    [[nodiscard]] double at(int x, int y, int c) const { return rgb[(std::size_t(y) * width + x) * 3 + c]; }
    [[nodiscard]] bool same_size(const RenderedImage &o) const {
        return width == o.width && height == o.height;
    }
};

/// Averages non-overlapping factor x factor blocks (color and transmittance).
RenderedImage box_downsample(const RenderedImage &img, int factor);

double linear_to_srgb(double v);

/// Binary PPM (P6), 8 bits per channel, sRGB transfer applied.
void write_ppm(const RenderedImage &img, const std::filesystem::path &path);

/// Flat little-endian dump: uint32 width, height, channels (3), then float32
/// values row-major with interleaved channels.
void write_float_dump(const RenderedImage &img, const std::filesystem::path &path);
RenderedImage read_float_dump(const std::filesystem::path &path);

} // namespace afgs
