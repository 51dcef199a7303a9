// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/image.hpp"

#include "atomic_file.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace afgs {

static_assert(std::endian::native == std::endian::little, "float dumps assume a little-endian host");

RenderedImage box_downsample(const RenderedImage &img, int factor) {
    if (factor < 1) throw ImageError("box_downsample: factor must be >= 1");
    if (factor == 1) return img;
    if (img.width % factor != 0 || img.height % factor != 0)
        throw ImageError("box_downsample: size is not a multiple of the factor");
    RenderedImage out(img.width / factor, img.height / factor);
    const double inv = 1.0 / (double(factor) * factor);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            double acc[3] = {0.0, 0.0, 0.0};
            double trans = 0.0;
            for (int dy = 0; dy < factor; ++dy) {
                const int sy = y * factor + dy;
                for (int dx = 0; dx < factor; ++dx) {
                    const int sx = x * factor + dx;
                    for (int c = 0; c < 3; ++c) acc[c] += img.at(sx, sy, c);
                    trans += img.transmittance[std::size_t(sy) * img.width + sx];
                }
            }
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = acc[c] * inv;
            out.transmittance[std::size_t(y) * out.width + x] = trans * inv;
        }
    }
    return out;
}

double linear_to_srgb(double v) {
    v = std::clamp(v, 0.0, 1.0);
    return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

void write_ppm(const RenderedImage &img, const std::filesystem::path &path) {
    std::ostringstream os(std::ios::binary);
    os << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    for (double v : img.rgb) {
        const auto byte = static_cast<unsigned char>(std::lround(linear_to_srgb(v) * 255.0));
        os.put(static_cast<char>(byte));
    }
    detail::write_file_atomically(path, os.str());
}

namespace {

void put_u32(std::string &buf, std::uint32_t v) {
    char bytes[4];
    std::memcpy(bytes, &v, 4);
    buf.append(bytes, 4);
}

} // namespace

void write_float_dump(const RenderedImage &img, const std::filesystem::path &path) {
    std::string buf;
    buf.reserve(12 + img.rgb.size() * 4);
    put_u32(buf, static_cast<std::uint32_t>(img.width));
    put_u32(buf, static_cast<std::uint32_t>(img.height));
    put_u32(buf, 3);
    for (double v : img.rgb) {
        const auto f = static_cast<float>(v);
        char bytes[4];
        std::memcpy(bytes, &f, 4);
        buf.append(bytes, 4);
    }
    detail::write_file_atomically(path, buf);
}

RenderedImage read_float_dump(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError("cannot open " + path.string());
    std::uint32_t header[3];
    if (!in.read(reinterpret_cast<char *>(header), sizeof(header)))
        throw ImageError("truncated header in " + path.string());
    if (header[2] != 3) throw ImageError("expected 3 channels in " + path.string());
    RenderedImage img(static_cast<int>(header[0]), static_cast<int>(header[1]));
    std::vector<float> values(img.rgb.size());
    if (!in.read(reinterpret_cast<char *>(values.data()),
                 static_cast<std::streamsize>(values.size() * sizeof(float))))
        throw ImageError("truncated pixel data in " + path.string());
    std::copy(values.begin(), values.end(), img.rgb.begin());
    return img;
}

} // namespace afgs
