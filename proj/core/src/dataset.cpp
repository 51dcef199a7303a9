// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/dataset.hpp"

#include "afgs/scene_io.hpp"
#include "atomic_file.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace afgs {

const CameraModel &Dataset::camera(int index) const {
    for (const auto &c : cameras)
        if (c.camera_index == index) return c;
    throw FormatError("dataset has no camera " + std::to_string(index));
}

std::vector<double> Dataset::timesteps() const {
    std::vector<double> out;
    for (const auto &f : frames) out.push_back(f.t);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<TrainingView> Dataset::views(const std::string &split) const {
    std::vector<TrainingView> out;
    for (const auto &f : frames)
        if (f.split == split) out.push_back({camera(f.camera_index), f.t, f.image});
    return out;
}

std::string manifest_text(const Dataset &ds) {
    std::string out = "afgs-dataset 1\n";
    out += "scene " + ds.scene_profile + ' ' + std::to_string(ds.seed) + ' ' + std::to_string(ds.primitive_count) + '\n';
    out += "rig " + ds.rig_profile + ' ' + std::to_string(ds.supersample) + '\n';
    out += "background " + format_double(ds.background.x()) + ' ' + format_double(ds.background.y()) + ' ' +
           format_double(ds.background.z()) + '\n';
    for (const auto &c : ds.cameras) out += "camera " + format_camera(c) + '\n';
    for (const auto &f : ds.frames)
        out += "frame " + std::to_string(f.camera_index) + ' ' + format_double(f.t) + ' ' + f.split + ' ' + f.file + '\n';
    return out;
}

void save_dataset(const Dataset &ds, const std::filesystem::path &dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "frames");
    fs::create_directories(dir / "previews");
    for (const auto &f : ds.frames) {
        if (f.file.empty()) throw FormatError("dataset frame without a file name");
        write_float_dump(f.image, dir / f.file);
        fs::path preview = dir / "previews" / fs::path(f.file).filename();
        preview.replace_extension(".ppm");
        write_ppm(f.image, preview);
    }
    Checkpoint gt;
    gt.scene = ds.ground_truth;
    gt.cameras = ds.cameras;
    save_checkpoint(gt, dir / "ground_truth.scene");
    detail::write_file_atomically(dir / "manifest.txt", manifest_text(ds));
}

namespace {

std::vector<std::string> split_fields(const std::string &line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

template <class T> T parse_number(const std::string &s, int line) {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw FormatError("manifest line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

} // namespace

Dataset load_dataset(const std::filesystem::path &dir) {
    std::ifstream in(dir / "manifest.txt");
    if (!in) throw FormatError("no manifest.txt in " + dir.string());
    Dataset ds;
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string &what) {
        throw FormatError("manifest line " + std::to_string(line_no) + ": " + what);
    };
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto f = split_fields(line);
        if (f.empty()) continue;
        if (!header) {
            if (f.size() != 2 || f[0] != "afgs-dataset") fail("missing 'afgs-dataset' header");
            if (f[1] != "1") fail("unsupported dataset version " + f[1]);
            header = true;
            continue;
        }
        if (f[0] == "scene") {
            if (f.size() != 4) fail("'scene' needs 3 fields");
            ds.scene_profile = f[1];
            ds.seed = parse_number<std::uint64_t>(f[2], line_no);
            ds.primitive_count = parse_number<int>(f[3], line_no);
        } else if (f[0] == "rig") {
            if (f.size() != 3) fail("'rig' needs 2 fields");
            ds.rig_profile = f[1];
            ds.supersample = parse_number<int>(f[2], line_no);
        } else if (f[0] == "background") {
            if (f.size() != 4) fail("'background' needs 3 fields");
            ds.background = Vec3(parse_number<double>(f[1], line_no), parse_number<double>(f[2], line_no),
                                 parse_number<double>(f[3], line_no));
        } else if (f[0] == "camera") {
            try {
                ds.cameras.push_back(parse_camera(f, 1));
            } catch (const FormatError &e) {
                fail(e.what());
            }
        } else if (f[0] == "frame") {
            if (f.size() != 5) fail("'frame' needs 4 fields");
            DatasetFrame fr;
            fr.camera_index = parse_number<int>(f[1], line_no);
            fr.t = parse_number<double>(f[2], line_no);
            fr.split = f[3];
            if (fr.split != "train" && fr.split != "test") fail("split must be train or test");
            fr.file = f[4];
            ds.frames.push_back(std::move(fr));
        } else {
            fail("unknown record '" + f[0] + "'");
        }
    }
    if (!header) throw FormatError("empty manifest in " + dir.string());
    for (auto &fr : ds.frames) {
        const CameraModel &cam = ds.camera(fr.camera_index);
        try {
            fr.image = read_float_dump(dir / fr.file);
        } catch (const ImageError &e) {
            throw FormatError(std::string("frame ") + fr.file + ": " + e.what());
        }
        if (fr.image.width != cam.width || fr.image.height != cam.height)
            throw FormatError("frame " + fr.file + " does not match its camera resolution");
    }
    const auto gt = dir / "ground_truth.scene";
    if (std::filesystem::exists(gt)) ds.ground_truth = load_checkpoint(gt).scene;
    return ds;
}

} // namespace afgs
