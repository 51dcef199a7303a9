// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace afgs {

std::string_view to_string(ParamGroup group) {
    switch (group) {
    case ParamGroup::position: return "position";
    case ParamGroup::rotation: return "rotation";
    case ParamGroup::scale: return "scale";
    case ParamGroup::opacity: return "opacity";
    case ParamGroup::color: return "color";
    case ParamGroup::deformation: return "deformation";
    }
    return "unknown";
}

void Adam::step(ParamGroup group, std::span<double> params, std::span<const double> grads, double lr) {
    if (params.size() != grads.size()) throw std::invalid_argument("adam: parameter/gradient size mismatch");
    Moments &mo = moments(group);
    if (mo.m.empty() && mo.steps == 0) {
        mo.m.assign(params.size(), 0.0);
        mo.v.assign(params.size(), 0.0);
    }
    if (mo.m.size() != params.size()) throw std::invalid_argument("adam: parameter count changed");
    ++mo.steps;
    const double c1 = 1.0 - std::pow(beta1, double(mo.steps));
    const double c2 = 1.0 - std::pow(beta2, double(mo.steps));
    for (std::size_t i = 0; i < params.size(); ++i) {
        mo.m[i] = beta1 * mo.m[i] + (1.0 - beta1) * grads[i];
        mo.v[i] = beta2 * mo.v[i] + (1.0 - beta2) * grads[i] * grads[i];
        params[i] -= lr * (mo.m[i] / c1) / (std::sqrt(mo.v[i] / c2) + epsilon);
    }
}

} // namespace afgs
