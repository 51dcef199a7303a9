// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/config.hpp"
#include "afgs/dataset.hpp"
#include "afgs/image.hpp"
#include "afgs/scene_io.hpp"
#include "afgs/scenes.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

namespace afgs {
namespace {

namespace fs = std::filesystem;
using testing::Rng;

class TempDir {
public:
    TempDir() : path_(fs::temp_directory_path() / ("afgs_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++))) {
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path &path() const { return path_; }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

Checkpoint sample_checkpoint() {
    Rng rng(61);
    Checkpoint c;
    c.scene = make_scene(SceneProfile::orbiting_blobs, 3, 4);
    c.scene.primitives[0].min_sampling_interval = 0.0123456789012345;
    c.scene.primitives[2].min_sampling_interval = 1.0 / 3.0;
    c.tracker = FrequencyTracker(0.25, 77);
    c.tracker->mode = TrackerMode::momentum;
    c.iteration = 1234;
    FilterConfig f;
    f.kind = FilterKind::mip2d;
    f.rho_thre = 5e-6;
    f.per_axis = false;
    c.filter = f;
    c.cameras = make_rig(RigProfile::multiview_ring, 3, 51.2, 32, 24);
    Adam adam;
    std::vector<double> p(5, 0.1), g(5);
    for (double &v : g) v = rng.uniform(-1, 1);
    adam.step(ParamGroup::opacity, p, g, 0.01);
    adam.step(ParamGroup::opacity, p, g, 0.01);
    c.optimizer = adam;
    return c;
}

TEST(Checkpoint, TextRoundTripIsExact) {
    const Checkpoint c = sample_checkpoint();
    const std::string text = serialize_checkpoint(c);
    const Checkpoint back = parse_checkpoint(text);
    EXPECT_EQ(serialize_checkpoint(back), text);
    ASSERT_EQ(back.scene.size(), c.scene.size());
    for (std::size_t k = 0; k < c.scene.size(); ++k) {
        EXPECT_EQ(back.scene.primitives[k].p, c.scene.primitives[k].p);
        EXPECT_EQ(back.scene.primitives[k].r, c.scene.primitives[k].r);
        EXPECT_EQ(back.scene.primitives[k].min_sampling_interval, c.scene.primitives[k].min_sampling_interval);
        EXPECT_EQ(back.scene.tracks[k].times, c.scene.tracks[k].times);
    }
    EXPECT_EQ(back.iteration, 1234);
    EXPECT_EQ(back.tracker->mode, TrackerMode::momentum);
    EXPECT_EQ(back.tracker->switch_iteration, 77);
    EXPECT_EQ(back.filter->kind, FilterKind::mip2d);
    EXPECT_FALSE(back.filter->per_axis);
    ASSERT_EQ(back.cameras.size(), 3u);
    EXPECT_EQ(back.cameras[2].view.rotation, c.cameras[2].view.rotation);
    EXPECT_EQ(back.optimizer->moments(ParamGroup::opacity).m, c.optimizer->moments(ParamGroup::opacity).m);
    EXPECT_EQ(back.optimizer->moments(ParamGroup::opacity).steps, 2);
}

TEST(Checkpoint, MinimalSceneParses) {
    Checkpoint c;
    c.scene.primitives.resize(1);
    const Checkpoint back = parse_checkpoint(serialize_checkpoint(c));
    EXPECT_EQ(back.scene.size(), 1u);
    EXPECT_FALSE(back.tracker);
    EXPECT_FALSE(back.optimizer);
    EXPECT_TRUE(back.cameras.empty());
}

TEST(Checkpoint, ErrorsNameTheLine) {
    std::string text = serialize_checkpoint(sample_checkpoint());
    const auto pos = text.find('\n', text.find('\n', text.find('\n') + 1) + 1);
    text.insert(pos + 1, "garbage here\n");
    try {
        parse_checkpoint(text);
        FAIL() << "expected FormatError";
    } catch (const FormatError &e) {
        EXPECT_NE(std::string(e.what()).find("line"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_checkpoint("not-a-scene 1\n"), FormatError);
    EXPECT_THROW(parse_checkpoint(""), FormatError);
}

TEST(Checkpoint, FileRoundTrip) {
    TempDir dir;
    const Checkpoint c = sample_checkpoint();
    save_checkpoint(c, dir.path() / "a.scene");
    EXPECT_EQ(serialize_checkpoint(load_checkpoint(dir.path() / "a.scene")), serialize_checkpoint(c));
    EXPECT_THROW(load_checkpoint(dir.path() / "missing.scene"), FormatError);
}

TEST(FormatDouble, RoundTrips) {
    Rng rng(62);
    for (int i = 0; i < 200; ++i) {
        const double v = rng.uniform(-1e6, 1e6) * std::pow(10.0, rng.integer(-20, 5));
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
}

TEST(Image, FloatDumpRoundTrip) {
    TempDir dir;
    Rng rng(63);
    RenderedImage img(7, 5);
    for (double &v : img.rgb) v = rng.uniform();
    write_float_dump(img, dir.path() / "x.f32");
    const RenderedImage back = read_float_dump(dir.path() / "x.f32");
    ASSERT_TRUE(back.same_size(img));
    for (std::size_t i = 0; i < img.rgb.size(); ++i) EXPECT_EQ(back.rgb[i], double(float(img.rgb[i])));
    EXPECT_EQ(fs::file_size(dir.path() / "x.f32"), 12u + 4u * img.rgb.size());
}

TEST(Image, PpmHeaderAndSize) {
    TempDir dir;
    RenderedImage img(6, 4, 0.5);
    write_ppm(img, dir.path() / "x.ppm");
    std::ifstream in(dir.path() / "x.ppm", std::ios::binary);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    EXPECT_EQ(magic, "P6");
    EXPECT_EQ(w, 6);
    EXPECT_EQ(h, 4);
    EXPECT_EQ(maxval, 255);
    EXPECT_NEAR(linear_to_srgb(0.0), 0.0, 1e-12);
    EXPECT_NEAR(linear_to_srgb(1.0), 1.0, 1e-12);
}

TEST(Image, BoxDownsampleAverages) {
    RenderedImage img(4, 2);
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 2; ++y) img.at(x, y, 0) = x + 4 * y;
    const RenderedImage half = box_downsample(img, 2);
    EXPECT_EQ(half.width, 2);
    EXPECT_EQ(half.height, 1);
    EXPECT_DOUBLE_EQ(half.at(0, 0, 0), (0 + 1 + 4 + 5) / 4.0);
    EXPECT_THROW(box_downsample(img, 3), ImageError);
}

TEST(Dataset, SaveLoadRoundTrip) {
    TempDir dir;
    Dataset ds;
    ds.scene_profile = "pulsing_grid";
    ds.seed = 5;
    ds.primitive_count = 3;
    ds.rig_profile = "multiview_ring";
    ds.supersample = 2;
    ds.background = Vec3(0.1, 0.2, 0.3);
    ds.ground_truth = make_scene(SceneProfile::pulsing_grid, 5, 3);
    ds.cameras = make_rig(RigProfile::multiview_ring, 2, 20.0, 12, 10);
    int n = 0;
    for (const auto &cam : ds.cameras)
        for (double t : {0.0, 0.5}) {
            DatasetFrame fr;
            fr.camera_index = cam.camera_index;
            fr.t = t;
            fr.split = n == 3 ? "test" : "train";
            fr.file = "frames/f" + std::to_string(n++) + ".f32";
            fr.image = render_reference(ds.ground_truth, cam, t, 2, ds.background);
            ds.frames.push_back(fr);
        }
    save_dataset(ds, dir.path());
    const Dataset back = load_dataset(dir.path());
    EXPECT_EQ(manifest_text(back), manifest_text(ds));
    EXPECT_EQ(back.frames.size(), 4u);
    EXPECT_EQ(back.views("train").size(), 3u);
    EXPECT_EQ(back.views("test").size(), 1u);
    EXPECT_EQ(back.timesteps(), (std::vector<double>{0.0, 0.5}));
    EXPECT_EQ(back.background, ds.background);
    EXPECT_EQ(back.ground_truth.size(), 3u);
    EXPECT_EQ(back.frames[1].image.rgb[5], double(float(ds.frames[1].image.rgb[5])));
    EXPECT_THROW(load_dataset(dir.path() / "nope"), FormatError);
}

TEST(Config, ProfileDefaults) {
    const RunConfig mono = profile_defaults(TrainingProfile::monocular);
    const RunConfig multi = profile_defaults(TrainingProfile::multiview);
    EXPECT_DOUBLE_EQ(mono.filter.rho_thre, 0.05);
    EXPECT_DOUBLE_EQ(multi.filter.rho_thre, 5e-6);
    EXPECT_EQ(mono.train.scale_mode, ScaleLossMode::sum);
    EXPECT_EQ(multi.train.scale_mode, ScaleLossMode::mean);
    EXPECT_EQ(mono.filter.kind, FilterKind::adaptive4d);
    EXPECT_DOUBLE_EQ(mono.filter.sigma_s, 0.2);
    EXPECT_DOUBLE_EQ(mono.filter.rho_min, 0.2);
    EXPECT_DOUBLE_EQ(mono.filter.rho_max, 5.0);
    EXPECT_DOUBLE_EQ(mono.train.lambda_v, 0.2);
    EXPECT_EQ(mono.train.warmup_iterations, 3000);
    EXPECT_EQ(mono.train.switch_iteration, 6000);
    EXPECT_EQ(mono.train.total_iterations, 10000);
}

TEST(Config, ParseAndApply) {
    const Settings s = parse_settings("# comment\n  rho_min = 0.3 \nfilter=mip2d\n\nscale_loss = mean # trailing\n");
    EXPECT_EQ(s.at("rho_min"), "0.3");
    RunConfig c = profile_defaults(TrainingProfile::monocular);
    apply_settings(c, s);
    EXPECT_DOUBLE_EQ(c.filter.rho_min, 0.3);
    EXPECT_EQ(c.filter.kind, FilterKind::mip2d);
    EXPECT_EQ(c.train.scale_mode, ScaleLossMode::mean);
    EXPECT_THROW(apply_settings(c, {{"no_such_key", "1"}}), ConfigError);
    EXPECT_THROW(apply_settings(c, {{"rho_min", "abc"}}), ConfigError);
    EXPECT_THROW(apply_settings(c, {{"iterations", "2.5"}}), ConfigError);
    EXPECT_THROW(parse_settings("just words\n"), ConfigError);
}

TEST(Config, EveryKeyIsAccepted) {
    for (const auto &key : setting_keys()) {
        RunConfig c = profile_defaults(TrainingProfile::multiview);
        std::string value = "1";
        if (key == "filter") value = "none";
        if (key == "scale_loss") value = "sum";
        if (key == "background") value = "0.5";
        EXPECT_NO_THROW(apply_settings(c, {{key, value}})) << key;
    }
}

TEST(Config, DeskConfigFileLoads) {
    const Settings s = load_settings(AFGS_DESK_CONFIG);
    RunConfig c = profile_defaults(TrainingProfile::multiview);
    apply_settings(c, s);
    EXPECT_EQ(c.train.total_iterations, 5000);
    EXPECT_NO_THROW(c.train.validate());
}

} // namespace
} // namespace afgs
