// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0
//
// Plain-text scene / checkpoint format, one record per line, numbers in %.17g:
//
//   afgs-scene 1
//   primitives <N>
//   <id> <px py pz> <rw rx ry rz> <sx sy sz> <alpha> <r g b> <T or untracked>
//   tracks <M>                                        (M is 0 or N)
//   track <k> <K>
//   <t> <dp xyz> <dr wxyz> <ds xyz>                   (K lines)
//   tracker <static_estimate|momentum> <lambda_v> <switch_iteration>   (optional)
//   iteration <n>                                     (optional)
//   filter <kind> <sigma_s> <rho_min> <rho_max> <rho_thre> <epsilon> <render_rate_ratio> <per_axis> <screen_mip>
//   cameras <C>
//   camera <index> <f> <cx> <cy> <width> <height> <R row-major, 9> <translation, 3>
//   optimizer <beta1> <beta2> <epsilon>
//   group <name> <steps> <size>
//   m <size values>
//   v <size values>
//   end

#pragma once

#include "afgs/adam.hpp"
#include "afgs/filters.hpp"
#include "afgs/sampling_frequency.hpp"
#include "afgs/scene.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace afgs {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Checkpoint {
    Scene scene;
    std::optional<FrequencyTracker> tracker;
    std::optional<int> iteration;
    std::optional<FilterConfig> filter;
    std::vector<CameraModel> cameras;
    std::optional<Adam> optimizer;
};

std::string serialize_checkpoint(const Checkpoint &ckpt);
/// Throws FormatError with the offending line number.
Checkpoint parse_checkpoint(const std::string &text);

void save_checkpoint(const Checkpoint &ckpt, const std::filesystem::path &path);
Checkpoint load_checkpoint(const std::filesystem::path &path);

/// Camera record used by the scene and dataset formats (without the leading keyword).
std::string format_camera(const CameraModel &cam);
CameraModel parse_camera(const std::vector<std::string> &fields, std::size_t first);

/// %.17g formatting.
std::string format_double(double v);

/// Writes `text` through a temporary sibling file renamed over `path`.
void write_text_file(const std::filesystem::path &path, std::string_view text);

} // namespace afgs
