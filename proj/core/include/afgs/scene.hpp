// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "afgs/deformation.hpp"
#include "afgs/geometry.hpp"

#include <vector>

namespace afgs {

/// Primitives with one (possibly empty) deformation track each.
struct Scene {
    std::vector<GaussianPrimitive> primitives;
    std::vector<DeformationTrack> tracks;

    [[nodiscard]] std::size_t size() const { return primitives.size(); }
    [[nodiscard]] bool empty() const { return primitives.empty(); }

    /// Track of primitive k; an empty track when the scene carries none.
    [[nodiscard]] const DeformationTrack &track(std::size_t k) const;

    /// Gives every primitive a zero track keyed at `times`.
    void reset_tracks(const std::vector<double> &times);

    /// Throws GeometryError on invariant violations.
    void validate() const;
};

} // namespace afgs
