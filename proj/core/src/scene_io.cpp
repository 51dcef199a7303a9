// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/scene_io.hpp"

#include "atomic_file.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace afgs {

namespace {

constexpr const char *kHeader = "afgs-scene 1";

std::vector<std::string> split(const std::string &line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

class Reader {
public:
    explicit Reader(const std::string &text) : in_(text) {}

    bool next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            fields = split(line);
            if (!fields.empty()) return true;
        }
        fields.clear();
        return false;
    }

    [[noreturn]] void fail(const std::string &what) const {
        throw FormatError("scene file line " + std::to_string(line_no_) + ": " + what);
    }

    void expect(const std::string &keyword, std::size_t count) const {
        if (fields.empty() || fields[0] != keyword) fail("expected '" + keyword + "'");
        if (fields.size() != count) fail("'" + keyword + "' needs " + std::to_string(count - 1) + " fields");
    }

    double number(std::size_t i) const {
        if (i >= fields.size()) fail("missing field");
        const std::string &s = fields[i];
        if (s == "inf") return std::numeric_limits<double>::infinity();
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) fail("bad number '" + s + "'");
        return v;
    }

    long long integer(std::size_t i) const {
        if (i >= fields.size()) fail("missing field");
        const std::string &s = fields[i];
        long long v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) fail("bad integer '" + s + "'");
        return v;
    }

    Vec3 vec3(std::size_t i) const { return Vec3(number(i), number(i + 1), number(i + 2)); }
    Quat quat(std::size_t i) const { return Quat(number(i), number(i + 1), number(i + 2), number(i + 3)); }

    std::vector<std::string> fields;

private:
    std::istringstream in_;
    int line_no_ = 0;
};

void put(std::string &out, double v) {
    out += ' ';
    out += format_double(v);
}

void put(std::string &out, const Vec3 &v) {
    for (int i = 0; i < 3; ++i) put(out, v[i]);
}

void put(std::string &out, const Quat &q) {
    for (int i = 0; i < 4; ++i) put(out, q[i]);
}

std::optional<ParamGroup> parse_group(const std::string &name) {
    for (std::size_t g = 0; g < kParamGroupCount; ++g)
        if (to_string(ParamGroup(g)) == name) return ParamGroup(g);
    return std::nullopt;
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_camera(const CameraModel &cam) {
    std::string out = std::to_string(cam.camera_index);
    put(out, cam.f);
    put(out, cam.principal_point.x());
    put(out, cam.principal_point.y());
    out += ' ' + std::to_string(cam.width) + ' ' + std::to_string(cam.height);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) put(out, cam.view.rotation(r, c));
    put(out, cam.view.translation);
    return out;
}

CameraModel parse_camera(const std::vector<std::string> &fields, std::size_t first) {
    if (fields.size() != first + 18) throw FormatError("camera record needs 18 fields");
    auto num = [&](std::size_t i) {
        double v = 0.0;
        const std::string &s = fields[first + i];
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("bad camera number '" + s + "'");
        return v;
    };
    CameraModel cam;
    cam.camera_index = int(num(0));
    cam.f = num(1);
    cam.principal_point = Vec2(num(2), num(3));
    cam.width = int(num(4));
    cam.height = int(num(5));
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) cam.view.rotation(r, c) = num(6 + 3 * r + c);
    cam.view.translation = Vec3(num(15), num(16), num(17));
    try {
        cam.validate();
    } catch (const GeometryError &e) {
        throw FormatError(std::string("invalid camera: ") + e.what());
    }
    return cam;
}

std::string serialize_checkpoint(const Checkpoint &ck) {
    std::string out = std::string(kHeader) + '\n';
    const Scene &scene = ck.scene;
    out += "primitives " + std::to_string(scene.size()) + '\n';
    for (const auto &g : scene.primitives) {
        out += std::to_string(g.id);
        put(out, g.p);
        put(out, g.r);
        put(out, g.s);
        put(out, g.alpha);
        put(out, g.color);
        out += g.min_sampling_interval ? ' ' + format_double(*g.min_sampling_interval) : std::string(" untracked");
        out += '\n';
    }
    out += "tracks " + std::to_string(scene.tracks.size()) + '\n';
    for (std::size_t k = 0; k < scene.tracks.size(); ++k) {
        const auto &tr = scene.tracks[k];
        out += "track " + std::to_string(k) + ' ' + std::to_string(tr.size()) + '\n';
        for (std::size_t j = 0; j < tr.size(); ++j) {
            out += format_double(tr.times[j]);
            put(out, tr.keyframes[j].dp);
            put(out, tr.keyframes[j].dr);
            put(out, tr.keyframes[j].ds);
            out += '\n';
        }
    }
    if (ck.tracker) {
        out += "tracker ";
        out += ck.tracker->mode == TrackerMode::momentum ? "momentum" : "static_estimate";
        put(out, ck.tracker->lambda_v);
        out += ' ' + std::to_string(ck.tracker->switch_iteration) + '\n';
    }
    if (ck.iteration) out += "iteration " + std::to_string(*ck.iteration) + '\n';
    if (ck.filter) {
        const FilterConfig &f = *ck.filter;
        out += "filter " + std::string(to_string(f.kind));
        for (double v : {f.sigma_s, f.rho_min, f.rho_max, f.rho_thre, f.epsilon, f.render_rate_ratio}) put(out, v);
        out += std::string(" ") + (f.per_axis ? "1" : "0") + ' ' + (f.screen_mip ? "1" : "0") + '\n';
    }
    out += "cameras " + std::to_string(ck.cameras.size()) + '\n';
    for (const auto &cam : ck.cameras) out += "camera " + format_camera(cam) + '\n';
    if (ck.optimizer) {
        const Adam &a = *ck.optimizer;
        out += "optimizer";
        put(out, a.beta1);
        put(out, a.beta2);
        put(out, a.epsilon);
        out += '\n';
        for (std::size_t g = 0; g < kParamGroupCount; ++g) {
            const auto &mo = a.groups[g];
            out += "group " + std::string(to_string(ParamGroup(g))) + ' ' + std::to_string(mo.steps) + ' ' +
                   std::to_string(mo.m.size()) + '\n';
            out += 'm';
            for (double v : mo.m) put(out, v);
            out += "\nv";
            for (double v : mo.v) put(out, v);
            out += '\n';
        }
    }
    out += "end\n";
    return out;
}

Checkpoint parse_checkpoint(const std::string &text) {
    Reader rd(text);
    Checkpoint ck;
    if (!rd.next() || rd.fields.size() != 2 || rd.fields[0] != "afgs-scene")
        rd.fail("missing 'afgs-scene' header");
    if (rd.fields[1] != "1") rd.fail("unsupported scene format version " + rd.fields[1]);

    if (!rd.next()) rd.fail("unexpected end of file");
    rd.expect("primitives", 2);
    const long long n = rd.integer(1);
    if (n < 0) rd.fail("negative primitive count");
    for (long long k = 0; k < n; ++k) {
        if (!rd.next()) rd.fail("unexpected end of file in primitives");
        if (rd.fields.size() != 16) rd.fail("primitive record needs 16 fields");
        GaussianPrimitive g;
        g.id = rd.integer(0);
        g.p = rd.vec3(1);
        g.r = rd.quat(4);
        g.s = rd.vec3(8);
        g.alpha = rd.number(11);
        g.color = rd.vec3(12);
        if (rd.fields[15] != "untracked") g.min_sampling_interval = rd.number(15);
        ck.scene.primitives.push_back(g);
    }

    if (!rd.next()) rd.fail("unexpected end of file");
    rd.expect("tracks", 2);
    const long long m = rd.integer(1);
    if (m != 0 && m != n) rd.fail("track count must be 0 or the primitive count");
    for (long long k = 0; k < m; ++k) {
        if (!rd.next()) rd.fail("unexpected end of file in tracks");
        rd.expect("track", 3);
        if (rd.integer(1) != k) rd.fail("tracks out of order");
        const long long kf = rd.integer(2);
        DeformationTrack tr;
        for (long long j = 0; j < kf; ++j) {
            if (!rd.next()) rd.fail("unexpected end of file in keyframes");
            if (rd.fields.size() != 11) rd.fail("keyframe record needs 11 fields");
            tr.times.push_back(rd.number(0));
            tr.keyframes.push_back({rd.vec3(1), rd.quat(4), rd.vec3(8)});
        }
        ck.scene.tracks.push_back(std::move(tr));
    }

    bool ended = false;
    while (rd.next()) {
        const std::string &key = rd.fields[0];
        if (key == "end") {
            ended = true;
            break;
        }
        if (key == "tracker") {
            rd.expect("tracker", 4);
            FrequencyTracker tr;
            if (rd.fields[1] == "momentum") tr.mode = TrackerMode::momentum;
            else if (rd.fields[1] != "static_estimate") rd.fail("unknown tracker mode");
            tr.lambda_v = rd.number(2);
            tr.switch_iteration = int(rd.integer(3));
            ck.tracker = tr;
        } else if (key == "iteration") {
            rd.expect("iteration", 2);
            ck.iteration = int(rd.integer(1));
        } else if (key == "filter") {
            rd.expect("filter", 10);
            FilterConfig f;
            const auto kind = parse_filter_kind(rd.fields[1]);
            if (!kind) rd.fail("unknown filter '" + rd.fields[1] + "'");
            f.kind = *kind;
            f.sigma_s = rd.number(2);
            f.rho_min = rd.number(3);
            f.rho_max = rd.number(4);
            f.rho_thre = rd.number(5);
            f.epsilon = rd.number(6);
            f.render_rate_ratio = rd.number(7);
            f.per_axis = rd.integer(8) != 0;
            f.screen_mip = rd.integer(9) != 0;
            ck.filter = f;
        } else if (key == "cameras") {
            rd.expect("cameras", 2);
            const long long c = rd.integer(1);
            for (long long i = 0; i < c; ++i) {
                if (!rd.next() || rd.fields[0] != "camera") rd.fail("expected 'camera'");
                try {
                    ck.cameras.push_back(parse_camera(rd.fields, 1));
                } catch (const FormatError &e) {
                    rd.fail(e.what());
                }
            }
        } else if (key == "optimizer") {
            rd.expect("optimizer", 4);
            Adam a;
            a.beta1 = rd.number(1);
            a.beta2 = rd.number(2);
            a.epsilon = rd.number(3);
            for (std::size_t g = 0; g < kParamGroupCount; ++g) {
                if (!rd.next()) rd.fail("unexpected end of file in optimizer");
                rd.expect("group", 4);
                const auto group = parse_group(rd.fields[1]);
                if (!group) rd.fail("unknown parameter group");
                auto &mo = a.moments(*group);
                mo.steps = rd.integer(2);
                const std::size_t size = std::size_t(rd.integer(3));
                for (auto *vec : {&mo.m, &mo.v}) {
                    if (!rd.next() || rd.fields.size() != size + 1) rd.fail("moment record has the wrong size");
                    vec->resize(size);
                    for (std::size_t i = 0; i < size; ++i) (*vec)[i] = rd.number(i + 1);
                }
            }
            ck.optimizer = a;
        } else {
            rd.fail("unknown section '" + key + "'");
        }
    }
    if (!ended) rd.fail("missing 'end'");
    try {
        ck.scene.validate();
    } catch (const GeometryError &e) {
        throw FormatError(std::string("invalid scene: ") + e.what());
    }
    return ck;
}

void save_checkpoint(const Checkpoint &ckpt, const std::filesystem::path &path) {
    detail::write_file_atomically(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_checkpoint(ss.str());
}

void write_text_file(const std::filesystem::path &path, std::string_view text) {
    detail::write_file_atomically(path, text);
}

} // namespace afgs
