// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0
//
// Dataset directory layout:
//
//   manifest.txt         afgs-dataset 1
//                        scene <profile> <seed> <primitive_count>
//                        rig <profile> <supersample>
//                        background <r> <g> <b>
//                        camera <index> <f> <cx> <cy> <w> <h> <R, 9> <translation, 3>
//                        frame <camera_index> <t> <train|test> <file>
//   frames/*.f32         float dumps of the targets (see image.hpp)
//   previews/*.ppm       8-bit sRGB previews
//   ground_truth.scene   the generating scene

#pragma once

#include "afgs/image.hpp"
#include "afgs/scene.hpp"
#include "afgs/train.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace afgs {

struct DatasetFrame {
    int camera_index = 0;
    double t = 0.0;
    std::string split = "train";
    std::string file;
    RenderedImage image;
};

struct Dataset {
    std::string scene_profile;
    std::uint64_t seed = 0;
    int primitive_count = 0;
    std::string rig_profile;
    int supersample = 1;
    Vec3 background = Vec3::Zero();
    std::vector<CameraModel> cameras;
    std::vector<DatasetFrame> frames;
    Scene ground_truth;

    [[nodiscard]] const CameraModel &camera(int index) const;
    /// Distinct frame times in increasing order.
    [[nodiscard]] std::vector<double> timesteps() const;
    /// Frames of one split as training views.
    [[nodiscard]] std::vector<TrainingView> views(const std::string &split) const;
};

std::string manifest_text(const Dataset &ds);

/// Writes manifest, frames, previews and the ground-truth scene into `dir`.
void save_dataset(const Dataset &ds, const std::filesystem::path &dir);

/// Throws FormatError on a malformed manifest or missing frame files.
Dataset load_dataset(const std::filesystem::path &dir);

} // namespace afgs
