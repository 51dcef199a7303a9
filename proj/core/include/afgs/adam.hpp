// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace afgs {

enum class ParamGroup : std::size_t { position, rotation, scale, opacity, color, deformation };
inline constexpr std::size_t kParamGroupCount = 6;

std::string_view to_string(ParamGroup group);

/// Adam with independent moments and step counts per parameter group.
class Adam {
public:
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-15;

    struct Moments {
        long long steps = 0;
        std::vector<double> m;
        std::vector<double> v;
    };
    std::array<Moments, kParamGroupCount> groups;

    /// One update of `params` in place. The group's moments are (re)sized on first use;
    /// throws std::invalid_argument if the size later changes.
    void step(ParamGroup group, std::span<double> params, std::span<const double> grads, double lr);

    [[nodiscard]] Moments &moments(ParamGroup g) { return groups[std::size_t(g)]; }
    [[nodiscard]] const Moments &moments(ParamGroup g) const { return groups[std::size_t(g)]; }
};

} // namespace afgs
