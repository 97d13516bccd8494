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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctav/geometry.hpp"
#include "testutil.hpp"

using namespace ctav;
using namespace ctav::test;

TEST_CASE("triangle_frame pins the stated column convention") {
    const TriangleFrame f =
        triangle_frame(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
    CHECK(f.T.isApprox(Vec3(1.0 / 3, 1.0 / 3, 0), 1e-15));
    CHECK(f.R.col(0).isApprox(Vec3(1, 0, 0), 1e-15));
    CHECK(f.R.col(1).isApprox(Vec3(0, 0, 1), 1e-15));
    CHECK(f.R.col(2).isApprox(Vec3(0, -1, 0), 1e-15));
    CHECK(f.k == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("triangle_frame orthonormality and translation equivariance") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec3 v0 = 2.0 * random_unit_vec3(rng);
        const Vec3 v1 = v0 + random_unit_vec3(rng);
        const Vec3 v2 = v0 + random_unit_vec3(rng);
        TriangleFrame f;
        try {
            f = triangle_frame(v0, v1, v2);
        } catch (const DegenerateTriangle&) {
            continue;
        }
        CHECK((f.R.transpose() * f.R - Mat3::Identity()).norm() < 1e-12);
        CHECK(f.R.determinant() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(f.k > 0.0);

        const Vec3 t(0.3, -1.7, 2.2);
        const TriangleFrame g = triangle_frame(v0 + t, v1 + t, v2 + t);
        CHECK((g.R - f.R).norm() < 1e-12);
        CHECK(g.k == doctest::Approx(f.k).epsilon(1e-12));
        CHECK((g.T - (f.T + t)).norm() < 1e-12);
    }
}

TEST_CASE("triangle_frame rejects collinear vertices") {
    CHECK_THROWS_AS(triangle_frame(Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2)),
                    DegenerateTriangle);
    CHECK_THROWS_AS(triangle_frame(Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(1, 0, 0)),
                    DegenerateTriangle);
}

TEST_CASE("scale law: scaling vertices about T scales k and keeps R") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Vec3 v0 = random_unit_vec3(rng), v1 = v0 + random_unit_vec3(rng),
                   v2 = v0 + random_unit_vec3(rng);
        TriangleFrame f;
        try {
            f = triangle_frame(v0, v1, v2);
        } catch (const DegenerateTriangle&) {
            continue;
        }
        const double c = uniform(rng, 0.5, 3.0);
        const auto scaled = [&](const Vec3& v) { return f.T + c * (v - f.T); };
        const TriangleFrame g = triangle_frame(scaled(v0), scaled(v1), scaled(v2));
        CHECK((g.R - f.R).norm() < 1e-10);
        CHECK(g.k == doctest::Approx(c * f.k).epsilon(1e-10));
        CHECK((g.T - f.T).norm() < 1e-10);
    }
}

TEST_CASE("local_to_global identity frame and direct substitution") {
    const TriangleFrame id;
    std::mt19937_64 rng(3);
    const Vec3 mu(0.2, -0.4, 0.9);
    const Mat3 r = random_rotation(rng);
    const Vec3 s(0.5, 0.6, 0.7);
    const SplatTransform g = local_to_global(mu, r, s, id);
    CHECK((g.mu - mu).norm() == 0.0);
    CHECK((g.rot - r).norm() == 0.0);
    CHECK((g.scale - s).norm() == 0.0);

    TriangleFrame f;
    f.k = 2.0;
    f.T = Vec3(1, 0, 0);
    const SplatTransform h = local_to_global(Vec3(0, 0, 1), Mat3::Identity(),
                                             Vec3(0.1, 0.1, 0.1), f);
    CHECK(h.mu.isApprox(Vec3(1, 0, 2), 1e-15));
    CHECK(h.scale.isApprox(Vec3(0.2, 0.2, 0.2), 1e-15));
}

TEST_CASE("local/global transforms invert each other") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        TriangleFrame f;
        f.R = random_rotation(rng);
        f.T = 3.0 * random_unit_vec3(rng);
        f.k = uniform(rng, 0.1, 4.0);
        const Vec3 mu = 2.0 * random_unit_vec3(rng);
        const Mat3 r = random_rotation(rng);
        const Vec3 s(uniform(rng, 0.01, 2.0), uniform(rng, 0.01, 2.0),
                     uniform(rng, 0.01, 2.0));
        const SplatTransform g = local_to_global(mu, r, s, f);
        const SplatTransform back = global_to_local(g.mu, g.rot, g.scale, f);
        CHECK((back.mu - mu).norm() < 1e-9);
        CHECK((back.rot - r).norm() < 1e-9);
        CHECK((back.scale - s).norm() < 1e-9);

        // And the other composition order.
        const SplatTransform l = global_to_local(mu, r, s, f);
        const SplatTransform fwd = local_to_global(l.mu, l.rot, l.scale, f);
        CHECK((fwd.mu - mu).norm() < 1e-9);
    }
}

TEST_CASE("global_to_local halves positions when k = 2") {
    TriangleFrame f;
    f.k = 2.0;
    const SplatTransform l =
        global_to_local(Vec3(2, 0, 0), Mat3::Identity(), Vec3(1, 1, 1), f);
    CHECK(l.mu.isApprox(Vec3(1, 0, 0), 1e-15));
    CHECK(l.scale.isApprox(Vec3(0.5, 0.5, 0.5), 1e-15));
}

TEST_CASE("canonicalize_view identities and the 90 degree example") {
    std::mt19937_64 rng(5);
    const Mat3 r = random_rotation(rng);
    const Vec3 v = random_unit_vec3(rng);
    CHECK((canonicalize_view(v, r, r) - v).norm() < 1e-12);

    for (int trial = 0; trial < 50; ++trial) {
        const Mat3 rc = random_rotation(rng), rd = random_rotation(rng);
        const Vec3 vd = random_unit_vec3(rng);
        const Vec3 vc = canonicalize_view(vd, rc, rd);
        CHECK(vc.norm() == doctest::Approx(1.0).epsilon(1e-9));
        // Swapping the rotations inverts the map.
        CHECK((canonicalize_view(vc, rd, rc) - vd).norm() < 1e-9);
    }

    const Mat3 rot90z =
        UnitQuaternion::from_axis_angle(Vec3(0, 0, 1), M_PI / 2).to_rotation_matrix();
    const Vec3 vc = canonicalize_view(Vec3(1, 0, 0), Mat3::Identity(), rot90z);
    CHECK(vc.isApprox(Vec3(0, -1, 0), 1e-12));
}

TEST_CASE("quat_distance metric properties") {
    const UnitQuaternion a{1, 0, 0, 0};
    const UnitQuaternion b{0, 1, 0, 0};
    CHECK(quat_distance(a, a) == 0.0);
    CHECK(quat_distance(a, b) == doctest::Approx(1.0));
    const double c = std::cos(M_PI / 4), s = std::sin(M_PI / 4);
    CHECK(quat_distance(a, UnitQuaternion{c, s, 0, 0}) ==
          doctest::Approx(1.0 - c).epsilon(1e-12));

    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const UnitQuaternion q = random_quat(rng), p = random_quat(rng);
        const double d = quat_distance(q, p);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
        CHECK(d == doctest::Approx(quat_distance(p, q)).epsilon(1e-15));
        const UnitQuaternion nq{-q.w, -q.x, -q.y, -q.z};
        CHECK(quat_distance(q, nq) < 1e-15);
    }
}

TEST_CASE("quat_to_rotmat known values and double cover") {
    CHECK((UnitQuaternion::identity().to_rotation_matrix() - Mat3::Identity()).norm() ==
          0.0);

    const double c = std::cos(M_PI / 4), s = std::sin(M_PI / 4);
    Mat3 expect;
    expect << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    CHECK((quat_to_rotmat(c, 0, 0, s) - expect).norm() < 1e-12);

    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const UnitQuaternion q = random_quat(rng);
        const Mat3 r = q.to_rotation_matrix();
        CHECK((r * r.transpose() - Mat3::Identity()).norm() < 1e-12);
        CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK((quat_to_rotmat(-q.w, -q.x, -q.y, -q.z) - r).norm() < 1e-12);
    }
}

TEST_CASE("quat_to_rotmat_backward matches central differences") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 100; ++trial) {
        double q[4];
        std::normal_distribution<double> g(0.0, 1.0);
        for (double& v : q) v = g(rng);
        if (std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]) < 0.3) {
            continue;
        }
        Mat3 upstream;
        for (int i = 0; i < 9; ++i) upstream(i / 3, i % 3) = g(rng);

        double analytic[4] = {0, 0, 0, 0};
        quat_to_rotmat_backward(q, upstream, analytic);
        for (int a = 0; a < 4; ++a) {
            const double fd = central_diff(
                [&] {
                    return upstream
                        .cwiseProduct(quat_to_rotmat(q[0], q[1], q[2], q[3]))
                        .sum();
                },
                &q[a], 1e-6);
            CHECK(rel_err(analytic[a], fd) < 1e-6);
        }
    }
}

TEST_CASE("camera validation and look_at geometry") {
    Camera cam;
    cam.width = 0;
    CHECK_THROWS_AS(cam.validate(), ConfigInvalid);
    cam = Camera{};
    cam.fx = -1;
    CHECK_THROWS_AS(cam.validate(), ConfigInvalid);

    const Camera look =
        Camera::look_at(Vec3(0, 0, 3), Vec3::Zero(), 60, 60, 64, 64);
    // Target center projects to the principal point.
    const Vec3 xc = look.world_to_camera(Vec3::Zero());
    CHECK(xc.z() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::abs(xc.x()) < 1e-12);
    CHECK(std::abs(xc.y()) < 1e-12);
    CHECK((look.center() - Vec3(0, 0, 3)).norm() < 1e-12);
    CHECK((look.R * look.R.transpose() - Mat3::Identity()).norm() < 1e-12);
}
