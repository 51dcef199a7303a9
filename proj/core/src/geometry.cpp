// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "afgs/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

namespace afgs {

Quat quat_multiply(const Quat &a, const Quat &b) {
    return Quat(a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
                a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
                a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
                a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]);
}

Quat quat_from_axis_angle(const Vec3 &axis, double angle) {
    const Vec3 n = axis.normalized();
    const double h = 0.5 * angle;
    return Quat(std::cos(h), n.x() * std::sin(h), n.y() * std::sin(h), n.z() * std::sin(h));
}

Quat quat_normalized(const Quat &q) {
    const double n = q.norm();
    if (!(n > 0.0)) throw GeometryError("cannot normalize a zero quaternion");
    return q / n;
}

Mat3 rotation_matrix(const Quat &q) {
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Mat3 R;
    R << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
        2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
        2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
    return R;
}

void CameraModel::validate() const {
    if (!(f > 0.0)) throw GeometryError("camera focal length must be positive");
    if (width < 1 || height < 1) throw GeometryError("camera resolution must be at least 1x1");
    const Mat3 should_be_identity = view.rotation * view.rotation.transpose();
    if ((should_be_identity - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
        throw GeometryError("camera view rotation is not orthonormal");
}

CameraModel CameraModel::scaled(double factor) const {
    CameraModel out = *this;
    out.f = f * factor;
    out.principal_point = principal_point * factor;
    out.width = static_cast<int>(std::lround(width * factor));
    out.height = static_cast<int>(std::lround(height * factor));
    return out;
}

CameraModel look_at(const Vec3 &eye, const Vec3 &target, const Vec3 &up, double f, int width,
                    int height, int camera_index) {
    const Vec3 forward = (target - eye).normalized();
    Vec3 right = forward.cross(up);
    if (right.norm() < 1e-12) right = forward.unitOrthogonal();
    right.normalize();
    const Vec3 down = forward.cross(right);

    CameraModel cam;
    cam.f = f;
    cam.width = width;
    cam.height = height;
    cam.principal_point = Vec2(0.5 * width, 0.5 * height);
    cam.view.rotation.row(0) = right.transpose();
    cam.view.rotation.row(1) = down.transpose();
    cam.view.rotation.row(2) = forward.transpose();
    cam.view.translation = -cam.view.rotation * eye;
    cam.camera_index = camera_index;
    return cam;
}

Mat3 build_covariance(const Quat &r, const Vec3 &s) {
    if (std::abs(r.norm() - 1.0) > 1e-9) throw GeometryError("build_covariance: quaternion is not unit");
    if ((s.array() <= 0.0).any()) throw GeometryError("build_covariance: scales must be positive");
    const Mat3 R = rotation_matrix(r);
    return R * s.array().square().matrix().asDiagonal() * R.transpose();
}

Mat23 projection_jacobian(const Vec3 &t, double f) {
    const double iz = 1.0 / t.z();
    Mat23 J;
    J << f * iz, 0.0, -f * t.x() * iz * iz,
        0.0, f * iz, -f * t.y() * iz * iz;
    return J;
}

bool clamp_eigenvalues(Mat2 &cov) {
    const double a = cov(0, 0), b = 0.5 * (cov(0, 1) + cov(1, 0)), c = cov(1, 1);
    const double mid = 0.5 * (a + c);
    const double rad = std::sqrt(std::max(0.0, 0.25 * (a - c) * (a - c) + b * b));
    const double lo = mid - rad;
    if (lo >= kMinProjectedEigenvalue) return false;
    Eigen::SelfAdjointEigenSolver<Mat2> es(Mat2{{a, b}, {b, c}});
    const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(kMinProjectedEigenvalue);
    cov = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    return true;
}

std::optional<Projection> project_covariance(const Vec3 &center, const Mat3 &cov3d,
                                             const CameraModel &cam) {
    const Vec3 t = cam.view.apply(center);
    if (!(t.z() > kNearPlane)) return std::nullopt;
    const Mat23 M = projection_jacobian(t, cam.f) * cam.view.rotation;
    Projection out;
    out.covariance.cov = M * cov3d * M.transpose();
    out.covariance.cov = 0.5 * (out.covariance.cov + out.covariance.cov.transpose()).eval();
    clamp_eigenvalues(out.covariance.cov);
    out.covariance.depth = t.z();
    out.center = Vec2(cam.f * t.x() / t.z() + cam.principal_point.x(),
                      cam.f * t.y() / t.z() + cam.principal_point.y());
    return out;
}

std::optional<Projection> project_gaussian(const GaussianPrimitive &g, const CameraModel &cam) {
    return project_covariance(g.p, build_covariance(quat_normalized(g.r), g.s), cam);
}

bool visible(const Projection &proj, const CameraModel &cam) {
    if (!(proj.covariance.depth > kNearPlane)) return false;
    const double mx = kVisibilitySigmas * std::sqrt(proj.covariance.cov(0, 0));
    const double my = kVisibilitySigmas * std::sqrt(proj.covariance.cov(1, 1));
    const double u = proj.center.x(), v = proj.center.y();
    return u >= -mx && u <= cam.width + mx && v >= -my && v <= cam.height + my;
}

bool visible(const Vec3 &center, const Mat3 &cov3d, const CameraModel &cam) {
    const auto proj = project_covariance(center, cov3d, cam);
    return proj && visible(*proj, cam);
}

bool visibility(const GaussianPrimitive &g, const CameraModel &cam) {
    return visible(g.p, build_covariance(quat_normalized(g.r), g.s), cam);
}

} // namespace afgs
