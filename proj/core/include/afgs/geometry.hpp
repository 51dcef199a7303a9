// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0
//
// Primitives, pinhole cameras and the world -> camera -> screen projection of
// Gaussian covariances.

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace afgs {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;

/// Quaternion stored as (w, x, y, z).
using Quat = Eigen::Vector4d;

/// Primitives closer to the camera than this (camera-space z) are culled.
inline constexpr double kNearPlane = 0.01;

/// Projected covariances are clamped to at least this eigenvalue (pixel^2).
inline constexpr double kMinProjectedEigenvalue = 1e-12;

/// Visibility margin in projected standard deviations.
inline constexpr double kVisibilitySigmas = 3.0;

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Quat identity_quat() { return Quat(1.0, 0.0, 0.0, 0.0); }

/// Hamilton product a * b.
Quat quat_multiply(const Quat &a, const Quat &b);

/// Unit quaternion for a rotation of `angle` radians about `axis`.
Quat quat_from_axis_angle(const Vec3 &axis, double angle);

Quat quat_normalized(const Quat &q);

/// Rotation matrix of a unit quaternion.
Mat3 rotation_matrix(const Quat &q);

/// One anisotropic Gaussian. Scales are standard deviations in world units.
struct GaussianPrimitive {
    std::int64_t id = 0;
    Vec3 p = Vec3::Zero();
    Quat r = identity_quat();
    Vec3 s = Vec3::Constant(0.1);
    double alpha = 1.0;
    Vec3 color = Vec3::Constant(0.5);
    /// Minimum sampling interval T (world units per pixel); empty when untracked.
    std::optional<double> min_sampling_interval;

    /// Maximum sampling frequency, the reciprocal of the interval.
    [[nodiscard]] std::optional<double> max_sampling_frequency() const {
        if (!min_sampling_interval) return std::nullopt;
        return 1.0 / *min_sampling_interval;
    }
};

/// Rigid world-to-camera transform x_cam = rotation * x_world + translation.
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    [[nodiscard]] Vec3 apply(const Vec3 &x) const { return rotation * x + translation; }
    /// Camera center in world coordinates.
    [[nodiscard]] Vec3 center() const { return -rotation.transpose() * translation; }
};

/// Pinhole camera. Pixel (i, j) has its center at (i + 0.5, j + 0.5).
struct CameraModel {
    double f = 100.0;
    Vec2 principal_point = Vec2::Zero();
    int width = 1;
    int height = 1;
    RigidTransform view;
    int camera_index = 0;

    /// Throws GeometryError if f <= 0, the size is empty, or the rotation is not orthonormal.
    void validate() const;

    /// Same camera with focal length, principal point and resolution scaled by `factor`.
    [[nodiscard]] CameraModel scaled(double factor) const;
};

/// Camera at `eye` looking at `target`; +y of the image points along -up.
CameraModel look_at(const Vec3 &eye, const Vec3 &target, const Vec3 &up, double f, int width,
                    int height, int camera_index = 0);

/// Screen-space covariance (pixel^2) with the primitive's camera-space depth.
struct Covariance2D {
    Mat2 cov = Mat2::Identity();
    double depth = 0.0;
};

/// R diag(s)^2 R^T. Throws GeometryError for a non-unit quaternion or non-positive scale.
Mat3 build_covariance(const Quat &r, const Vec3 &s);

/// Affine (EWA) projection Jacobian of the pinhole map at camera-space point `t`.
Mat23 projection_jacobian(const Vec3 &t, double f);

struct Projection {
    Covariance2D covariance;
    Vec2 center = Vec2::Zero();
};

/// Projects a world-space Gaussian (center, covariance). Returns nothing when the
/// center lies at or in front of the near plane.
std::optional<Projection> project_covariance(const Vec3 &center, const Mat3 &cov3d,
                                             const CameraModel &cam);

/// Projects a primitive using its own position and covariance.
std::optional<Projection> project_gaussian(const GaussianPrimitive &g, const CameraModel &cam);

/// Symmetric 2x2 with eigenvalues raised to at least kMinProjectedEigenvalue.
/// Returns true if the input needed clamping.
bool clamp_eigenvalues(Mat2 &cov);

/// True if the projection is in front of the near plane and its center lies
/// inside the image rectangle grown by 3 projected standard deviations per axis.
bool visible(const Projection &proj, const CameraModel &cam);
bool visible(const Vec3 &center, const Mat3 &cov3d, const CameraModel &cam);
bool visibility(const GaussianPrimitive &g, const CameraModel &cam);

} // namespace afgs
