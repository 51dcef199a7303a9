// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode helpers for quaternion operations. Internal to afgs_core.

#pragma once

#include "afgs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace afgs::detail {

using Mat4 = Eigen::Matrix4d;

/// a * b == quat_left_matrix(a) * b
inline Mat4 quat_left_matrix(const Quat &a) {
    Mat4 L;
    L << a[0], -a[1], -a[2], -a[3],
        a[1], a[0], -a[3], a[2],
        a[2], a[3], a[0], -a[1],
        a[3], -a[2], a[1], a[0];
    return L;
}

/// a * b == quat_right_matrix(b) * a
inline Mat4 quat_right_matrix(const Quat &b) {
    Mat4 R;
    R << b[0], -b[1], -b[2], -b[3],
        b[1], b[0], b[3], -b[2],
        b[2], -b[3], b[0], b[1],
        b[3], b[2], -b[1], b[0];
    return R;
}

/// Gradient w.r.t. q of a loss depending on q / |q|.
inline Quat normalize_backward(const Quat &q, const Quat &grad_unit) {
    const double n = q.norm();
    const Quat u = q / n;
    return (grad_unit - u * u.dot(grad_unit)) / n;
}

/// Gradient w.r.t. the unit quaternion q of tr(G^T R(q)).
inline Quat rotation_backward(const Quat &q, const Mat3 &G) {
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Quat g;
    g[0] = 2.0 * (-z * G(0, 1) + y * G(0, 2) + z * G(1, 0) - x * G(1, 2) - y * G(2, 0) + x * G(2, 1));
    g[1] = 2.0 * (y * G(0, 1) + z * G(0, 2) + y * G(1, 0) - 2.0 * x * G(1, 1) - w * G(1, 2) +
                  z * G(2, 0) + w * G(2, 1) - 2.0 * x * G(2, 2));
    g[2] = 2.0 * (-2.0 * y * G(0, 0) + x * G(0, 1) + w * G(0, 2) + x * G(1, 0) + z * G(1, 2) -
                  w * G(2, 0) + z * G(2, 1) - 2.0 * y * G(2, 2));
    g[3] = 2.0 * (-2.0 * z * G(0, 0) - w * G(0, 1) + x * G(0, 2) + w * G(1, 0) - 2.0 * z * G(1, 1) +
                  y * G(1, 2) + x * G(2, 0) + y * G(2, 1));
    return g;
}

/// Reverse pass of slerp(a, b, w) for unit a, b.
inline std::pair<Quat, Quat> slerp_backward(const Quat &a, const Quat &b_in, double w,
                                            const Quat &grad_out) {
    double d = a.dot(b_in);
    const double sign = d < 0.0 ? -1.0 : 1.0;
    const Quat b = sign * b_in;
    d = std::min(std::abs(d), 1.0);
    const double theta = std::acos(d);
    Quat ga, gb;
    if (theta < 1e-6) {
        const Quat v = (1.0 - w) * a + w * b;
        const Quat gv = normalize_backward(v, grad_out);
        ga = (1.0 - w) * gv;
        gb = w * gv;
    } else {
        const double s = std::sin(theta), c = std::cos(theta);
        const double s0 = std::sin((1.0 - w) * theta), s1 = std::sin(w * theta);
        const double c0 = s0 / s, c1 = s1 / s;
        const double dc0 = ((1.0 - w) * std::cos((1.0 - w) * theta) * s - s0 * c) / (s * s);
        const double dc1 = (w * std::cos(w * theta) * s - s1 * c) / (s * s);
        const double g_theta = grad_out.dot(dc0 * a + dc1 * b);
        // d theta / d a = -b / sin(theta), d theta / d b = -a / sin(theta)
        ga = c0 * grad_out - g_theta * b / s;
        gb = c1 * grad_out - g_theta * a / s;
    }
    return {ga, sign * gb};
}

} // namespace afgs::detail
