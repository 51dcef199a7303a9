// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration. Values are resolved as profile defaults, then a flat
// key=value file, then command-line overrides.
//
// Defaults table:
//
//   key               monocular    multiview
//   filter            adaptive4d   adaptive4d
//   sigma_s           0.2          0.2
//   rho_min           0.2          0.2
//   rho_max           5            5
//   rho_thre          0.05         5e-6
//   epsilon           1e-4         1e-4
//   lambda_scale      0.1          0.1
//   scale_loss        sum          mean
//   lambda_v          0.2          0.2
//   warmup            3000         3000
//   switch            6000         6000
//   iterations        10000        10000

#pragma once

#include "afgs/filters.hpp"
#include "afgs/train.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace afgs {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TrainingProfile { monocular, multiview };

std::string_view to_string(TrainingProfile p);
std::optional<TrainingProfile> parse_training_profile(std::string_view name);

struct RunConfig {
    TrainingProfile profile = TrainingProfile::monocular;
    FilterConfig filter;
    TrainConfig train;
    /// Fitted primitives (0: twice the dataset's ground-truth count).
    int primitives = 0;
    /// Checkpoint period in iterations (0: only at the end).
    int checkpoint_every = 0;
};

RunConfig profile_defaults(TrainingProfile profile);

using Settings = std::map<std::string, std::string>;

/// key = value lines; '#' starts a comment. Throws ConfigError on malformed lines.
Settings parse_settings(const std::string &text);
Settings load_settings(const std::filesystem::path &path);

/// Applies settings in key order. Throws ConfigError on unknown keys or bad values.
void apply_settings(RunConfig &config, const Settings &settings);

/// Every key accepted by apply_settings.
const std::vector<std::string> &setting_keys();

} // namespace afgs
