// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include "afgs/rasterizer.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

namespace afgs::cli {

namespace fs = std::filesystem;

namespace {

std::string frame_name(int camera, double t, std::size_t serial) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "frames/%04zu_cam%d_t%.4f.f32", serial, camera, t);
    return buf;
}

std::vector<CameraModel> held_out_cameras(const GenerateOptions &o, int count, double f) {
    std::vector<CameraModel> out;
    if (o.rig == RigProfile::multiview_ring) {
        for (int i = 0; i < o.held_out; ++i) out.push_back(held_out_camera(count, f, o.width, o.height, i));
        return out;
    }
    // Arc: halfway between consecutive training cameras.
    RigOptions ro;
    const double step = count > 1 ? (ro.arc_end - ro.arc_start) / (count - 1) : 0.0;
    for (int i = 0; i < o.held_out; ++i) {
        RigOptions shifted = ro;
        shifted.arc_start = shifted.arc_end = ro.arc_start + step * ((i % std::max(count - 1, 1)) + 0.5);
        shifted.first_index = count + i;
        out.push_back(make_rig(RigProfile::monocular_arc, 1, f, o.width, o.height, shifted).front());
    }
    return out;
}

} // namespace

Dataset generate_dataset(const GenerateOptions &o) {
    if (o.width < 1 || o.height < 1) throw std::invalid_argument("resolution must be positive");
    if (o.timesteps < 1) throw std::invalid_argument("timesteps must be positive");
    if (o.held_out < 0) throw std::invalid_argument("held-out count must be non-negative");
    const double f = o.focal > 0.0 ? o.focal : 1.6 * o.width;
    const int count = o.cameras > 0 ? o.cameras : (o.rig == RigProfile::multiview_ring ? 4 : o.timesteps);

    Dataset ds;
    ds.scene_profile = std::string(to_string(o.scene));
    ds.seed = o.seed;
    ds.primitive_count = o.primitives;
    ds.rig_profile = std::string(to_string(o.rig));
    ds.supersample = o.supersample;
    ds.background = Vec3::Constant(o.background);
    ds.ground_truth = make_scene(o.scene, o.seed, o.primitives);
    ds.cameras = make_rig(o.rig, count, f, o.width, o.height);
    const auto times = default_timesteps(o.timesteps);

    std::size_t serial = 0;
    for (const auto &fr : render_ground_truth(ds.ground_truth, ds.cameras, o.rig, times, o.supersample, ds.background))
        ds.frames.push_back({fr.camera_index, fr.t, "train", frame_name(fr.camera_index, fr.t, serial++), fr.image});

    for (const auto &cam : held_out_cameras(o, count, f)) {
        ds.cameras.push_back(cam);
        for (double t : times)
            ds.frames.push_back({cam.camera_index, t, "test", frame_name(cam.camera_index, t, serial++),
                                 render_reference(ds.ground_truth, cam, t, o.supersample, ds.background)});
    }
    return ds;
}

RunConfig resolve_run_config(TrainingProfile profile, const std::optional<fs::path> &config_file,
                             const Settings &overrides) {
    RunConfig config = profile_defaults(profile);
    if (config_file) apply_settings(config, load_settings(*config_file));
    apply_settings(config, overrides);
    config.filter.validate();
    config.train.validate();
    return config;
}

TrainResult train_on_dataset(const Dataset &ds, const RunConfig &config, const TrainCallback &callback) {
    const auto views = ds.views("train");
    if (views.empty()) throw std::invalid_argument("dataset has no training frames");
    const int count = config.primitives > 0 ? config.primitives : 2 * std::max(ds.primitive_count, 1);
    Scene init = random_initialization(count, config.train.seed, ds.timesteps());
    return train(std::move(init), views, config.filter, config.train, callback);
}

Checkpoint make_checkpoint(const TrainState &state, const FilterConfig &filter, const Dataset &ds) {
    Checkpoint ck;
    ck.scene = state.scene;
    ck.tracker = state.tracker;
    ck.iteration = state.iteration;
    ck.filter = filter;
    ck.cameras = ds.cameras;
    ck.optimizer = state.optimizer;
    return ck;
}

std::string loss_report_csv(const std::vector<LossReport> &history) {
    std::string out = "iteration,color,scale,total,active\n";
    for (const auto &r : history)
        out += std::to_string(r.iteration) + ',' + format_double(r.color) + ',' + format_double(r.scale) + ',' +
               format_double(r.total) + ',' + std::to_string(r.active) + '\n';
    return out;
}

std::vector<MetricRow> evaluate_checkpoint(const Checkpoint &ckpt, const Dataset &ds, const std::vector<double> &scales,
                                           int reference_supersample, const std::string &label) {
    if (scales.empty()) throw std::invalid_argument("at least one scale factor is required");
    std::vector<const DatasetFrame *> frames;
    for (const auto &f : ds.frames)
        if (f.split == "test") frames.push_back(&f);
    if (frames.empty())
        for (const auto &f : ds.frames) frames.push_back(&f);
    if (frames.empty()) throw std::invalid_argument("dataset has no frames");
    const FilterConfig filter = ckpt.filter.value_or(FilterConfig{});

    std::vector<MetricRow> rows;
    for (double s : scales) {
        MetricRow row;
        row.scene = ds.scene_profile;
        row.filter = label;
        row.scale_factor = s;
        double psnr_sum = 0.0, ssim_sum = 0.0, hb_sum = 0.0;
        std::size_t covered = 0, covered_ref = 0;
        for (const DatasetFrame *f : frames) {
            RenderJob job;
            job.scene = &ckpt.scene;
            job.camera = ds.camera(f->camera_index);
            job.t = f->t;
            job.filter = filter;
            job.background = ds.background;
            const RenderedImage img = render_multiscale(job, {s}).front();
            const RenderedImage ref =
                render_reference(ds.ground_truth, job.camera.scaled(s), f->t, reference_supersample, ds.background);
            psnr_sum += psnr(img, ref);
            ssim_sum += std::min(img.width, img.height) >= kSsimWindow ? ssim(img, ref)
                                                                     : std::numeric_limits<double>::quiet_NaN();
            hb_sum += highband_energy(img, 0.5);
            covered += covered_pixels(img);
            covered_ref += covered_pixels(ref);
        }
        const double n = double(frames.size());
        row.psnr = psnr_sum / n;
        row.ssim = ssim_sum / n;
        row.highband = hb_sum / n;
        if (covered_ref > 0) row.coverage = double(covered) / double(covered_ref);
        rows.push_back(row);
    }
    return rows;
}

std::optional<AblationVariant> ablation_variant(const std::string &name, const RunConfig &base) {
    AblationVariant v{name, base.filter, base.train.lambda_scale};
    if (const auto kind = parse_filter_kind(name)) {
        v.filter.kind = *kind;
        return v;
    }
    if (name == "adaptive4d_equiv") {
        v.filter.kind = FilterKind::adaptive4d;
        v.filter.rho_min = v.filter.rho_max = 1.0;
        v.filter.rho_thre = 0.0;
        v.lambda_scale = 0.0;
        return v;
    }
    if (name == "smoothing3d_mask") {
        v.filter.kind = FilterKind::adaptive4d;
        v.filter.rho_max = v.filter.rho_min;
        v.lambda_scale = 0.0;
        return v;
    }
    return std::nullopt;
}

std::vector<MetricRow> run_ablation(const Dataset &ds, const RunConfig &base, const std::vector<std::string> &variants,
                                    const std::vector<double> &scales, int reference_supersample) {
    if (variants.empty()) throw std::invalid_argument("at least one filter is required");
    std::vector<AblationVariant> resolved;
    for (const auto &name : variants) {
        auto v = ablation_variant(name, base);
        if (!v) throw std::invalid_argument("unknown ablation filter '" + name + "'");
        resolved.push_back(*v);
    }
    std::vector<MetricRow> rows;
    for (const auto &v : resolved) {
        RunConfig config = base;
        config.filter = v.filter;
        config.train.lambda_scale = v.lambda_scale;
        const TrainResult result = train_on_dataset(ds, config);
        if (result.diverged) throw std::runtime_error(v.name + ": " + result.halt_reason);
        const Checkpoint ck = make_checkpoint(result.state, v.filter, ds);
        for (auto &row : evaluate_checkpoint(ck, ds, scales, reference_supersample, v.name)) rows.push_back(row);
    }
    return rows;
}

namespace {

struct TrainFlags {
    fs::path data, out, report, resume;
    std::string profile = "monocular";
    std::optional<std::string> filter;
    std::optional<fs::path> config;
    std::vector<std::string> sets;
    std::optional<int> iterations, seed, primitives, workers, checkpoint_every;
};

Settings collect_overrides(const TrainFlags &t) {
    Settings s;
    for (const auto &kv : t.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
        s[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (t.filter) s["filter"] = *t.filter;
    if (t.iterations) s["iterations"] = std::to_string(*t.iterations);
    if (t.seed) s["seed"] = std::to_string(*t.seed);
    if (t.primitives) s["primitives"] = std::to_string(*t.primitives);
    if (t.workers) s["workers"] = std::to_string(*t.workers);
    if (t.checkpoint_every) s["checkpoint_every"] = std::to_string(*t.checkpoint_every);
    return s;
}

RunConfig config_from(const TrainFlags &t, const Dataset &ds) {
    const auto profile = parse_training_profile(t.profile);
    if (!profile) throw ConfigError("unknown profile '" + t.profile + "'");
    // The dataset background sits between the profile defaults and the file.
    Settings overrides = collect_overrides(t);
    if (!overrides.count("background") && !(t.config && load_settings(*t.config).count("background")))
        overrides["background"] = format_double(ds.background.x());
    return resolve_run_config(*profile, t.config, overrides);
}

void add_train_options(CLI::App &cmd, TrainFlags &t) {
    cmd.add_option("--profile", t.profile, "Training profile")->check(CLI::IsMember({"monocular", "multiview"}));
    cmd.add_option("--filter", t.filter, "Filter kind (none, dilation2d, mip2d, smoothing3d, adaptive4d)");
    cmd.add_option("--config", t.config, "key=value configuration file")->check(CLI::ExistingFile);
    cmd.add_option("--set", t.sets, "Configuration override key=value (repeatable)");
    cmd.add_option("--iterations", t.iterations, "Total iterations");
    cmd.add_option("--seed", t.seed, "Initialization and view-order seed");
    cmd.add_option("--primitives", t.primitives, "Fitted primitive count");
    cmd.add_option("--workers", t.workers, "Render worker threads (0: all cores)");
}

int cmd_generate(const GenerateOptions &o, const std::string &scene, const std::string &rig, const fs::path &out) {
    GenerateOptions opts = o;
    opts.scene = *parse_scene_profile(scene);
    opts.rig = *parse_rig_profile(rig);
    const Dataset ds = generate_dataset(opts);
    save_dataset(ds, out);
    std::cout << "wrote " << ds.frames.size() << " frames to " << out.string() << '\n';
    return 0;
}

int cmd_train(const TrainFlags &t) {
    const Dataset ds = load_dataset(t.data);
    const RunConfig config = config_from(t, ds);
    const fs::path report = t.report.empty() ? fs::path(t.out.string() + ".loss.csv") : t.report;

    auto checkpoint_cb = [&](const TrainState &state, const LossReport &) {
        if (config.checkpoint_every > 0 && state.iteration % config.checkpoint_every == 0)
            save_checkpoint(make_checkpoint(state, config.filter, ds), t.out);
        return true;
    };
    TrainResult result;
    if (!t.resume.empty()) {
        Checkpoint ck = load_checkpoint(t.resume);
        if (!ck.tracker || !ck.optimizer || !ck.iteration)
            throw FormatError(t.resume.string() + ": not a training checkpoint");
        TrainState state{std::move(ck.scene), *ck.tracker, *ck.optimizer, *ck.iteration};
        result = resume(std::move(state), ds.views("train"), config.filter, config.train, checkpoint_cb);
    } else {
        result = train_on_dataset(ds, config, checkpoint_cb);
    }
    save_checkpoint(make_checkpoint(result.state, config.filter, ds), t.out);
    write_text_file(report, loss_report_csv(result.history));
    if (result.diverged) {
        std::cerr << "training halted: " << result.halt_reason << '\n';
        return kExitDiverged;
    }
    const double final_loss = result.history.empty() ? 0.0 : result.history.back().total;
    std::cout << "trained " << result.state.iteration << " iterations, final loss " << final_loss << '\n';
    return 0;
}

struct RenderFlags {
    fs::path checkpoint, out;
    std::vector<double> scales{1.0}, times{0.0};
    std::optional<int> camera;
    double background = 0.0;
};

int cmd_render(const RenderFlags &r) {
    const Checkpoint ck = load_checkpoint(r.checkpoint);
    if (ck.cameras.empty()) throw FormatError(r.checkpoint.string() + ": checkpoint has no cameras");
    const CameraModel *cam = &ck.cameras.front();
    if (r.camera) {
        cam = nullptr;
        for (const auto &c : ck.cameras)
            if (c.camera_index == *r.camera) cam = &c;
        if (!cam) throw std::invalid_argument("checkpoint has no camera " + std::to_string(*r.camera));
    }
    fs::create_directories(r.out);
    RenderJob job;
    job.scene = &ck.scene;
    job.camera = *cam;
    job.filter = ck.filter.value_or(FilterConfig{});
    job.background = Vec3::Constant(r.background);
    std::size_t written = 0;
    for (double t : r.times) {
        job.t = t;
        const auto images = render_multiscale(job, r.scales);
        for (std::size_t i = 0; i < images.size(); ++i) {
            char name[96];
            std::snprintf(name, sizeof name, "cam%d_t%.4f_x%g", cam->camera_index, t, r.scales[i]);
            write_ppm(images[i], r.out / (std::string(name) + ".ppm"));
            write_float_dump(images[i], r.out / (std::string(name) + ".f32"));
            ++written;
        }
    }
    std::cout << "wrote " << written << " images to " << r.out.string() << '\n';
    return 0;
}

void emit_csv(const std::vector<MetricRow> &rows, const fs::path &out) {
    if (out.empty()) std::cout << metrics_csv(rows);
    else write_metrics_csv(rows, out);
}

} // namespace

int run(int argc, char **argv) {
    CLI::App app{"Alias-free 4D Gaussian splatting on the CPU", "afgs"};
    app.require_subcommand(1);

    GenerateOptions gen;
    std::string gen_scene, gen_rig = "multiview_ring";
    std::optional<int> gen_height;
    fs::path gen_out;
    auto *generate = app.add_subcommand("generate", "Render a synthetic dataset");
    generate->add_option("--scene", gen_scene, "Scene profile")
        ->required()
        ->check(CLI::IsMember({"orbiting_blobs", "pulsing_grid", "thin_structures"}));
    generate->add_option("--rig", gen_rig, "Camera rig")->check(CLI::IsMember({"monocular_arc", "multiview_ring"}));
    generate->add_option("--seed", gen.seed, "Scene seed");
    generate->add_option("--primitives", gen.primitives, "Ground-truth primitive count")->check(CLI::PositiveNumber);
    generate->add_option("--cameras", gen.cameras, "Training cameras (default: 4 ring, one per timestep arc)");
    generate->add_option("--timesteps", gen.timesteps, "Timesteps in [0,1]")->check(CLI::PositiveNumber);
    generate->add_option("--width", gen.width, "Image width")->check(CLI::PositiveNumber);
    generate->add_option("--height", gen_height, "Image height (default: width)")->check(CLI::PositiveNumber);
    generate->add_option("--focal", gen.focal, "Focal length in pixels (default: 1.6 x width)");
    generate->add_option("--supersample", gen.supersample, "Reference supersampling factor")->check(CLI::PositiveNumber);
    generate->add_option("--held-out", gen.held_out, "Held-out test cameras")->check(CLI::NonNegativeNumber);
    generate->add_option("--background", gen.background, "Grey background level")->check(CLI::Range(0.0, 1.0));
    generate->add_option("--out", gen_out, "Output directory")->required();

    TrainFlags tr;
    auto *train_cmd = app.add_subcommand("train", "Fit a scene to a dataset");
    train_cmd->add_option("--data", tr.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    train_cmd->add_option("--out", tr.out, "Checkpoint path")->required();
    train_cmd->add_option("--report", tr.report, "Loss CSV path (default: <out>.loss.csv)");
    train_cmd->add_option("--resume", tr.resume, "Continue from a checkpoint")->check(CLI::ExistingFile);
    train_cmd->add_option("--checkpoint-every", tr.checkpoint_every, "Checkpoint period in iterations");
    add_train_options(*train_cmd, tr);

    RenderFlags rf;
    auto *render_cmd = app.add_subcommand("render", "Render a checkpoint at several scales");
    render_cmd->add_option("--checkpoint", rf.checkpoint, "Checkpoint path")->required()->check(CLI::ExistingFile);
    render_cmd->add_option("--scales", rf.scales, "Scale factors, e.g. 1,0.5,0.25,0.125")->delimiter(',')->expected(1, -1);
    render_cmd->add_option("--times", rf.times, "Times in [0,1]")->delimiter(',')->expected(1, -1);
    render_cmd->add_option("--camera", rf.camera, "Camera index (default: first)");
    render_cmd->add_option("--background", rf.background, "Grey background level")->check(CLI::Range(0.0, 1.0));
    render_cmd->add_option("--out", rf.out, "Output directory")->required();

    fs::path ev_checkpoint, ev_data, ev_out;
    std::vector<double> ev_scales;
    int ev_ss = 8;
    std::string ev_label;
    auto *eval = app.add_subcommand("eval", "Metrics of a checkpoint against supersampled references");
    eval->add_option("--checkpoint", ev_checkpoint, "Checkpoint path")->required()->check(CLI::ExistingFile);
    eval->add_option("--data", ev_data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--scales", ev_scales, "Scale factors")->required()->delimiter(',')->expected(1, -1);
    eval->add_option("--reference-supersample", ev_ss, "Reference supersampling")->check(CLI::PositiveNumber);
    eval->add_option("--label", ev_label, "Filter column (default: checkpoint filter)");
    eval->add_option("--out", ev_out, "CSV path (default: stdout)");

    TrainFlags ab;
    std::vector<std::string> ab_filters = {"none", "dilation2d", "mip2d", "smoothing3d", "adaptive4d"};
    std::vector<double> ab_scales;
    int ab_ss = 8;
    fs::path ab_out;
    auto *ablate = app.add_subcommand("ablate", "Train and evaluate every filter variant");
    ablate->add_option("--data", ab.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    ablate->add_option("--filters", ab_filters, "Variants: filter kinds, adaptive4d_equiv, smoothing3d_mask")
        ->delimiter(',')
        ->expected(1, -1);
    ablate->add_option("--scales", ab_scales, "Scale factors")->required()->delimiter(',')->expected(1, -1);
    ablate->add_option("--reference-supersample", ab_ss, "Reference supersampling")->check(CLI::PositiveNumber);
    ablate->add_option("--out", ab_out, "CSV path (default: stdout)");
    add_train_options(*ablate, ab);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    }

    try {
        if (*generate) {
            gen.height = gen_height.value_or(gen.width);
            return cmd_generate(gen, gen_scene, gen_rig, gen_out);
        }
        if (*train_cmd) return cmd_train(tr);
        if (*render_cmd) return cmd_render(rf);
        if (*eval) {
            const Checkpoint ck = load_checkpoint(ev_checkpoint);
            const Dataset ds = load_dataset(ev_data);
            const std::string label =
                ev_label.empty() ? std::string(to_string(ck.filter.value_or(FilterConfig{}).kind)) : ev_label;
            emit_csv(evaluate_checkpoint(ck, ds, ev_scales, ev_ss, label), ev_out);
            return 0;
        }
        if (*ablate) {
            const Dataset ds = load_dataset(ab.data);
            emit_csv(run_ablation(ds, config_from(ab, ds), ab_filters, ab_scales, ab_ss), ab_out);
            return 0;
        }
    } catch (const std::exception &e) {
        std::cerr << "afgs: error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

} // namespace afgs::cli
