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
#include "ctav/geometry.hpp"

#include <cmath>

namespace ctav {

UnitQuaternion UnitQuaternion::normalized(double w, double x, double y, double z) {
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw DegenerateWeights("cannot normalize zero or non-finite quaternion");
    }
    return UnitQuaternion{w / n, x / n, y / n, z / n};
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double radians) {
    const double n = axis.norm();
    if (!(n > 0.0)) {
        throw DegenerateWeights("axis must be nonzero");
    }
    const double half = 0.5 * radians;
    const Vec3 u = axis / n * std::sin(half);
    return UnitQuaternion{std::cos(half), u.x(), u.y(), u.z()};
}

Mat3 UnitQuaternion::to_rotation_matrix() const {
    return quat_to_rotmat(w, x, y, z);
}

double quat_distance(const UnitQuaternion& a, const UnitQuaternion& b) {
    // Clamp guards against |dot| marginally above 1 from rounding.
    const double d = std::abs(a.dot(b));
    return 1.0 - std::min(d, 1.0);
}

Mat3 quat_to_rotmat(double w, double x, double y, double z) {
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw DegenerateWeights("cannot normalize zero or non-finite quaternion");
    }
    w /= n;
    x /= n;
    y /= n;
    z /= n;
    Mat3 r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

void quat_to_rotmat_backward(const double q_raw[4], const Mat3& upstream,
                             double grad_q[4]) {
    const double n = std::sqrt(q_raw[0] * q_raw[0] + q_raw[1] * q_raw[1] +
                               q_raw[2] * q_raw[2] + q_raw[3] * q_raw[3]);
    const double w = q_raw[0] / n, x = q_raw[1] / n, y = q_raw[2] / n,
                 z = q_raw[3] / n;

    // dR/dq_hat for the unit quaternion, entry by entry.
    Mat3 dw, dx, dy, dz;
    dw << 0, -2 * z, 2 * y,
          2 * z, 0, -2 * x,
          -2 * y, 2 * x, 0;
    dx << 0, 2 * y, 2 * z,
          2 * y, -4 * x, -2 * w,
          2 * z, 2 * w, -4 * x;
    dy << -4 * y, 2 * x, 2 * w,
          2 * x, 0, 2 * z,
          -2 * w, 2 * z, -4 * y;
    dz << -4 * z, -2 * w, 2 * x,
          2 * w, -4 * z, 2 * y,
          2 * x, 2 * y, 0;

    Eigen::Vector4d g_hat(upstream.cwiseProduct(dw).sum(),
                          upstream.cwiseProduct(dx).sum(),
                          upstream.cwiseProduct(dy).sum(),
                          upstream.cwiseProduct(dz).sum());

    // Through the normalization q_hat = q / |q|: (I - q_hat q_hat^T) / |q|.
    const Eigen::Vector4d q_hat(w, x, y, z);
    const Eigen::Vector4d g = (g_hat - q_hat * q_hat.dot(g_hat)) / n;
    grad_q[0] += g[0];
    grad_q[1] += g[1];
    grad_q[2] += g[2];
    grad_q[3] += g[3];
}

TriangleFrame triangle_frame(const Vec3& v0, const Vec3& v1, const Vec3& v2) {
    const Vec3 e01 = v1 - v0;
    const Vec3 e02 = v2 - v0;
    const Vec3 cross = e01.cross(e02);
    const double area = 0.5 * cross.norm();
    if (!(area > 1e-12)) {
        throw DegenerateTriangle("triangle area <= 1e-12");
    }

    TriangleFrame f;
    f.T = (v0 + v1 + v2) / 3.0;

    const Vec3 edge_dir = e01.normalized();
    const Vec3 normal = cross.normalized();
    f.R.col(0) = edge_dir;
    f.R.col(1) = normal;
    f.R.col(2) = edge_dir.cross(normal);

    // Perpendicular distance from v2 to the line through (v0, v1).
    const double edge_len = e01.norm();
    const double perp = 2.0 * area / edge_len;
    f.k = 0.5 * (edge_len + perp);
    return f;
}

SplatTransform local_to_global(const Vec3& mu_local, const Mat3& rot_local,
                               const Vec3& scale_local, const TriangleFrame& f) {
    SplatTransform g;
    g.mu = f.k * (f.R * mu_local) + f.T;
    g.rot = f.R * rot_local;
    g.scale = f.k * scale_local;
    return g;
}

SplatTransform global_to_local(const Vec3& mu, const Mat3& rot, const Vec3& scale,
                               const TriangleFrame& f) {
    SplatTransform l;
    l.mu = f.R.transpose() * (mu - f.T) / f.k;
    l.rot = f.R.transpose() * rot;
    l.scale = scale / f.k;
    return l;
}

Vec3 canonicalize_view(const Vec3& view_dir, const Mat3& canonical_rot,
                       const Mat3& deformed_rot) {
    return canonical_rot * (deformed_rot.transpose() * view_dir);
}

void Camera::validate() const {
    if (width < 1 || height < 1) {
        throw ConfigInvalid("camera image size must be >= 1x1");
    }
    if (!(fx > 0.0) || !(fy > 0.0)) {
        throw ConfigInvalid("camera focal lengths must be positive");
    }
}

Camera Camera::look_at(const Vec3& position, const Vec3& target, double fx,
                       double fy, int width, int height) {
    // Camera convention: +z forward, +x right, +y down (image row direction).
    Vec3 forward = (target - position).normalized();
    Vec3 up_hint(0.0, 1.0, 0.0);
    if (std::abs(forward.dot(up_hint)) > 0.999) {
        up_hint = Vec3(0.0, 0.0, 1.0);
    }
    const Vec3 right = (-up_hint).cross(forward).normalized();
    const Vec3 down = forward.cross(right).normalized();

    Camera cam;
    cam.R.row(0) = right.transpose();
    cam.R.row(1) = down.transpose();
    cam.R.row(2) = forward.transpose();
    cam.t = -(cam.R * position);
    cam.fx = fx;
    cam.fy = fy;
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;
    cam.width = width;
    cam.height = height;
    cam.validate();
    return cam;
}

}  // namespace ctav
