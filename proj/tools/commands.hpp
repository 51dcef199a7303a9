// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0
//
// Subcommands of the afgs tool, callable without going through argv.

#pragma once

#include "afgs/config.hpp"
#include "afgs/dataset.hpp"
#include "afgs/metrics.hpp"
#include "afgs/scene_io.hpp"
#include "afgs/scenes.hpp"
#include "afgs/train.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace afgs::cli {

/// Exit code for a run stopped by the divergence guard.
inline constexpr int kExitDiverged = 3;

struct GenerateOptions {
    SceneProfile scene = SceneProfile::orbiting_blobs;
    RigProfile rig = RigProfile::multiview_ring;
    std::uint64_t seed = 0;
    int primitives = 20;
    int cameras = 0; // 0: 4 for the ring, one per timestep for the arc
    int timesteps = 8;
    int width = 64;
    int height = 64;
    double focal = 0.0; // 0: 1.6 x width
    int supersample = 4;
    int held_out = 1;
    double background = 0.0;
};

Dataset generate_dataset(const GenerateOptions &options);

/// Profile defaults, then the config file, then `overrides`.
RunConfig resolve_run_config(TrainingProfile profile, const std::optional<std::filesystem::path> &config_file,
                             const Settings &overrides);

/// Fits a fresh random initialization to the dataset's training frames. The
/// dataset background is used unless the configuration sets one.
TrainResult train_on_dataset(const Dataset &ds, const RunConfig &config, const TrainCallback &callback = {});

Checkpoint make_checkpoint(const TrainState &state, const FilterConfig &filter, const Dataset &ds);

/// iteration,color,scale,total,active with round-trip precision.
std::string loss_report_csv(const std::vector<LossReport> &history);

/// Renders the checkpoint at each scale against supersampled references of the
/// dataset's ground truth (test frames, or training frames if there are none).
std::vector<MetricRow> evaluate_checkpoint(const Checkpoint &ckpt, const Dataset &ds,
                                           const std::vector<double> &scales, int reference_supersample,
                                           const std::string &label);

struct AblationVariant {
    std::string name;
    FilterConfig filter;
    double lambda_scale = 0.0;
};

/// Filter kinds plus "adaptive4d_equiv" (rho_min = rho_max = 1, rho_thre = 0,
/// no scale loss) and "smoothing3d_mask" (fixed rho_min x sigma_s dilation with the
/// visibility mask). Empty for unknown names.
std::optional<AblationVariant> ablation_variant(const std::string &name, const RunConfig &base);

std::vector<MetricRow> run_ablation(const Dataset &ds, const RunConfig &base, const std::vector<std::string> &variants,
                                    const std::vector<double> &scales, int reference_supersample);

/// Parses argv and dispatches; returns the process exit code.
int run(int argc, char **argv);

} // namespace afgs::cli
