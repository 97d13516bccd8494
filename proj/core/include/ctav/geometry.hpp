/*
 * Copyright (C) 2026 The ctavatar authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <Eigen/Dense>

#include "ctav/errors.hpp"

namespace ctav {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Unit quaternion (w, x, y, z). Construction normalizes; a zero-norm input
/// is rejected.
struct UnitQuaternion {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    static UnitQuaternion identity() { return {}; }
    static UnitQuaternion normalized(double w, double x, double y, double z);
    static UnitQuaternion from_axis_angle(const Vec3& axis, double radians);

    double dot(const UnitQuaternion& o) const {
        return w * o.w + x * o.x + y * o.y + z * o.z;
    }
    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

    Mat3 to_rotation_matrix() const;
};

/// Rotation-aware distance on the unit quaternion double cover:
/// d = 1 - |<a, b>|, in [0, 1], zero iff a and b encode the same rotation.
double quat_distance(const UnitQuaternion& a, const UnitQuaternion& b);

/// Rotation matrix for an arbitrary (not necessarily unit) quaternion;
/// normalizes internally. Zero-norm input is rejected.
Mat3 quat_to_rotmat(double w, double x, double y, double z);

/// Jacobian of the normalized-quaternion rotation matrix: accumulates
/// d(sum_ij upstream_ij * R_ij) / d(q_raw) into grad_q[4]. q_raw is the raw
/// (pre-normalization) quaternion the forward pass was given.
void quat_to_rotmat_backward(const double q_raw[4], const Mat3& upstream,
                             double grad_q[4]);

/// Local coordinate frame of a mesh triangle: rotation R (columns =
/// [edge dir | normal | edge x normal]), origin T at the vertex centroid,
/// isotropic scale k = mean of |v1-v0| and the distance from v2 to that edge.
struct TriangleFrame {
    Mat3 R = Mat3::Identity();
    Vec3 T = Vec3::Zero();
    double k = 1.0;
};

/// Builds the local frame of triangle (v0, v1, v2).
/// Throws DegenerateTriangle when the triangle area is <= 1e-12.
TriangleFrame triangle_frame(const Vec3& v0, const Vec3& v1, const Vec3& v2);

/// A splat's geometric attributes in one coordinate space.
struct SplatTransform {
    Vec3 mu = Vec3::Zero();
    Mat3 rot = Mat3::Identity();
    Vec3 scale = Vec3::Ones();
};

/// mu = k R mu' + T, r = R r', s = k s'.
SplatTransform local_to_global(const Vec3& mu_local, const Mat3& rot_local,
                               const Vec3& scale_local, const TriangleFrame& f);

/// Exact inverse of local_to_global.
SplatTransform global_to_local(const Vec3& mu, const Mat3& rot, const Vec3& scale,
                               const TriangleFrame& f);

/// Maps a deformed-space view direction into the canonical space of the same
/// triangle: v_c = R_c R_d^T v_d. Norm preserving.
Vec3 canonicalize_view(const Vec3& view_dir, const Mat3& canonical_rot,
                       const Mat3& deformed_rot);

/// Pinhole camera. World-to-camera map is x_cam = R x + t; pixel (i, j)
/// covers [i, i+1) x [j, j+1) with its center at (i + 0.5, j + 0.5).
struct Camera {
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();
    double fx = 1.0, fy = 1.0;
    double cx = 0.0, cy = 0.0;
    int width = 1, height = 1;

    Vec3 center() const { return -R.transpose() * t; }
    Vec3 world_to_camera(const Vec3& p) const { return R * p + t; }

    /// Throws ConfigInvalid when width/height < 1 or a focal length <= 0.
    void validate() const;

    /// Camera at `position` looking at `target`, up hint +y.
    static Camera look_at(const Vec3& position, const Vec3& target, double fx,
                          double fy, int width, int height);
};

}  // namespace ctav
