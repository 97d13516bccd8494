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

#include <numeric>

#include "ctav/raster.hpp"
#include "testutil.hpp"

using namespace ctav;
using namespace ctav::test;

namespace {

Camera test_camera(int size = 8, double f = 40.0) {
    Camera cam;
    cam.fx = cam.fy = f;
    cam.cx = cam.cy = size / 2.0;
    cam.width = cam.height = size;
    return cam;  // identity extrinsics: +z forward
}

FrameAttributes random_scene(std::mt19937_64& rng, int n, double depth_lo = 2.0,
                             double depth_hi = 4.0) {
    FrameAttributes attrs;
    attrs.resize(n);
    for (int i = 0; i < n; ++i) {
        attrs.mu[i] = Vec3(uniform(rng, -0.25, 0.25), uniform(rng, -0.25, 0.25),
                           uniform(rng, depth_lo, depth_hi));
        attrs.rot[i] = random_rotation(rng);
        attrs.scale[i] = Vec3(uniform(rng, 0.05, 0.25), uniform(rng, 0.05, 0.25),
                              uniform(rng, 0.05, 0.25));
        attrs.rgb[i] = Vec3(uniform(rng, 0.1, 0.9), uniform(rng, 0.1, 0.9),
                            uniform(rng, 0.1, 0.9));
        attrs.alpha[i] = uniform(rng, 0.2, 0.9);
    }
    return attrs;
}

double image_dot(const Image& img, const Image& weights) {
    double s = 0;
    for (size_t i = 0; i < img.data.size(); ++i) s += img.data[i] * weights.data[i];
    return s;
}

}  // namespace

TEST_CASE("on-axis projection: mean at principal point, isotropic cov") {
    const Camera cam = test_camera(8, 32.0);
    FrameAttributes attrs;
    attrs.resize(1);
    const double d = 3.0, s = 0.2;
    attrs.mu[0] = Vec3(0, 0, d);
    attrs.scale[0] = Vec3(s, s, s);
    attrs.rgb[0] = Vec3(1, 0, 0);
    attrs.alpha[0] = 1.0;
    const auto proj = project(attrs, cam);
    REQUIRE(proj.size() == 1);
    CHECK((proj[0].mean - Vec2(cam.cx, cam.cy)).norm() < 1e-12);
    const double expect = (cam.fx * s / d) * (cam.fx * s / d) + kCovRegularizer;
    CHECK(proj[0].cov(0, 0) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(proj[0].cov(1, 1) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(std::abs(proj[0].cov(0, 1)) < 1e-12);
    CHECK(proj[0].depth == doctest::Approx(d));
}

TEST_CASE("near-plane culling drops splats behind the camera") {
    const Camera cam = test_camera();
    FrameAttributes attrs;
    attrs.resize(2);
    attrs.mu[0] = Vec3(0, 0, -1.0);
    attrs.mu[1] = Vec3(0, 0, 2.0);
    attrs.rgb[0] = attrs.rgb[1] = Vec3(1, 1, 1);
    attrs.alpha[0] = attrs.alpha[1] = 1.0;
    attrs.scale[0] = attrs.scale[1] = Vec3(0.1, 0.1, 0.1);
    const auto proj = project(attrs, cam);
    REQUIRE(proj.size() == 1);
    CHECK(proj[0].splat_index == 1);
}

TEST_CASE("doubling the focal length doubles off-axis offsets") {
    FrameAttributes attrs;
    attrs.resize(1);
    attrs.mu[0] = Vec3(0.2, -0.1, 3.0);
    attrs.scale[0] = Vec3(0.1, 0.1, 0.1);
    attrs.alpha[0] = 0.5;
    const Camera c1 = test_camera(8, 30.0);
    const Camera c2 = test_camera(8, 60.0);
    const Vec2 off1 = project(attrs, c1)[0].mean - Vec2(c1.cx, c1.cy);
    const Vec2 off2 = project(attrs, c2)[0].mean - Vec2(c2.cx, c2.cy);
    CHECK((off2 - 2.0 * off1).norm() < 1e-12);
}

TEST_CASE("blend: empty input gives the background") {
    const Image img = blend({}, 6, 4, Vec3(0.2, 0.4, 0.6));
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 6; ++x) {
            CHECK(img.at(x, y, 0) == 0.2);
            CHECK(img.at(x, y, 1) == 0.4);
            CHECK(img.at(x, y, 2) == 0.6);
        }
    }
}

TEST_CASE("blend: one opaque splat covers its center pixel") {
    Projected2DGaussian g;
    g.mean = Vec2(4.5, 4.5);  // center of pixel (4, 4)
    g.cov = 50.0 * Mat2::Identity();
    g.depth = 1.0;
    g.rgb = Vec3(0.9, 0.3, 0.1);
    g.alpha = 1.0;
    g.splat_index = 0;
    const std::vector<Projected2DGaussian> gs{g};
    const Image img = blend(gs, 9, 9, Vec3::Zero());
    CHECK(std::abs(img.at(4, 4, 0) - 0.9) < 1e-3);
    CHECK(std::abs(img.at(4, 4, 1) - 0.3) < 1e-3);
    CHECK(std::abs(img.at(4, 4, 2) - 0.1) < 1e-3);
}

TEST_CASE("blend: hand-evaluated two-splat compositing at delta = 0") {
    Projected2DGaussian front, back;
    front.mean = back.mean = Vec2(2.5, 2.5);
    front.cov = back.cov = 100.0 * Mat2::Identity();
    front.depth = 1.0;
    back.depth = 2.0;
    front.alpha = back.alpha = 0.5;
    front.rgb = Vec3(1.0, 0.0, 0.0);
    back.rgb = Vec3(0.0, 1.0, 0.0);
    front.splat_index = 0;
    back.splat_index = 1;
    const Vec3 bg(0.0, 0.0, 1.0);
    const std::vector<Projected2DGaussian> gs{back, front};  // order must not matter
    const Image img = blend(gs, 5, 5, bg);
    // 0.5*c1 + 0.25*c2 + 0.25*bg at the exact center.
    CHECK(img.at(2, 2, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(img.at(2, 2, 1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(img.at(2, 2, 2) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("energy bound: pixels are convex combinations") {
    std::mt19937_64 rng(5);
    const Camera cam = test_camera(12, 40.0);
    const FrameAttributes attrs = random_scene(rng, 12);
    const auto proj = project(attrs, cam);
    BlendCache cache;
    blend(proj, cam.width, cam.height, Vec3(0.5, 0.5, 0.5), &cache);
    for (const auto& entries : cache.per_pixel) {
        double t = 1.0, wsum = 0.0;
        for (const auto& e : entries) {
            CHECK(e.weight >= kMinBlendWeight);
            CHECK(e.weight <= 1.0);
            wsum += t * e.weight;
            t *= 1.0 - e.weight;
        }
        CHECK(wsum + t == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("order stability: shuffled input produces identical pixels") {
    std::mt19937_64 rng(7);
    const Camera cam = test_camera(10, 40.0);
    const FrameAttributes attrs = random_scene(rng, 9);
    auto proj = project(attrs, cam);
    const Image a = blend(proj, cam.width, cam.height, Vec3(0.1, 0.2, 0.3));
    std::shuffle(proj.begin(), proj.end(), rng);
    const Image b = blend(proj, cam.width, cam.height, Vec3(0.1, 0.2, 0.3));
    for (size_t i = 0; i < a.data.size(); ++i) {
        CHECK(std::abs(a.data[i] - b.data[i]) < 1e-12);
    }
}

TEST_CASE("blend_backward matches finite differences") {
    std::mt19937_64 rng(11);
    const Camera cam = test_camera(8, 40.0);
    for (int trial = 0; trial < 30; ++trial) {
        FrameAttributes attrs = random_scene(rng, 5);
        auto proj = project(attrs, cam);
        REQUIRE(!proj.empty());
        Image weights(cam.width, cam.height);
        for (double& v : weights.data) v = uniform(rng, -1, 1);

        BlendCache cache;
        blend(proj, cam.width, cam.height, Vec3(0.2, 0.2, 0.2), &cache);
        const RasterGrads grads =
            blend_backward(proj, cache, weights, Vec3(0.2, 0.2, 0.2));

        const auto value = [&] {
            const Image img = blend(proj, cam.width, cam.height, Vec3(0.2, 0.2, 0.2));
            return image_dot(img, weights);
        };
        for (size_t g = 0; g < proj.size(); ++g) {
            {
                const double fd = central_diff(value, &proj[g].alpha, 1e-6);
                CHECK(rel_err(grads.alpha[g], fd) < 1e-4);
            }
            for (int c = 0; c < 3; ++c) {
                const double fd = central_diff(value, &proj[g].rgb[c], 1e-6);
                CHECK(rel_err(grads.rgb[g][c], fd) < 1e-6);
            }
            for (int a = 0; a < 2; ++a) {
                const double fd = central_diff(value, &proj[g].mean[a], 1e-6);
                CHECK(rel_err(grads.mean[g][a], fd) < 1e-4);
            }
            // Covariance entries, keeping the matrix symmetric the way the
            // pipeline produces it.
            for (int a = 0; a < 2; ++a) {
                for (int b = a; b < 2; ++b) {
                    const double orig = proj[g].cov(a, b);
                    const double h = 1e-6;
                    proj[g].cov(a, b) = orig + h;
                    proj[g].cov(b, a) = orig + h;
                    const double fp = value();
                    proj[g].cov(a, b) = orig - h;
                    proj[g].cov(b, a) = orig - h;
                    const double fm = value();
                    proj[g].cov(a, b) = orig;
                    proj[g].cov(b, a) = orig;
                    const double fd = (fp - fm) / (2 * h);
                    const double analytic = a == b ? grads.cov[g](a, b)
                                                   : grads.cov[g](a, b) + grads.cov[g](b, a);
                    CHECK(rel_err(analytic, fd) < 1e-4);
                }
            }
        }
    }
}

TEST_CASE("blend_backward with zero upstream is zero") {
    std::mt19937_64 rng(13);
    const Camera cam = test_camera();
    const FrameAttributes attrs = random_scene(rng, 4);
    const auto proj = project(attrs, cam);
    BlendCache cache;
    blend(proj, cam.width, cam.height, Vec3::Zero(), &cache);
    const RasterGrads grads =
        blend_backward(proj, cache, Image(cam.width, cam.height), Vec3::Zero());
    for (size_t g = 0; g < proj.size(); ++g) {
        CHECK(grads.alpha[g] == 0.0);
        CHECK(grads.rgb[g].norm() == 0.0);
        CHECK(grads.mean[g].norm() == 0.0);
        CHECK(grads.cov[g].norm() == 0.0);
    }
}

TEST_CASE("project_backward matches finite differences through the camera") {
    std::mt19937_64 rng(17);
    Camera cam = test_camera(8, 40.0);
    cam.R = random_rotation(rng);
    cam.t = Vec3(0.05, -0.08, 0.1);
    for (int trial = 0; trial < 20; ++trial) {
        FrameAttributes attrs = random_scene(rng, 4);
        for (int i = 0; i < attrs.count(); ++i) {
            attrs.mu[i] = cam.center() + cam.R.transpose() * attrs.mu[i];  // keep in front
        }
        Image weights(cam.width, cam.height);
        for (double& v : weights.data) v = uniform(rng, -1, 1);

        const auto loss = [&] {
            const auto proj = project(attrs, cam);
            const Image img = blend(proj, cam.width, cam.height, Vec3(0.3, 0.3, 0.3));
            return image_dot(img, weights);
        };

        const auto proj = project(attrs, cam);
        BlendCache cache;
        blend(proj, cam.width, cam.height, Vec3(0.3, 0.3, 0.3), &cache);
        const RasterGrads rg = blend_backward(proj, cache, weights, Vec3(0.3, 0.3, 0.3));
        FrameGrads fg;
        fg.resize_zero(attrs.count());
        project_backward(attrs, cam, proj, rg, fg);

        for (int i = 0; i < attrs.count(); ++i) {
            for (int a = 0; a < 3; ++a) {
                const double fd = central_diff(loss, &attrs.mu[i][a], 1e-6);
                CHECK(rel_err(fg.mu[i][a], fd) < 2e-4);
            }
            for (int a = 0; a < 3; ++a) {
                const double fd = central_diff(loss, &attrs.scale[i][a], 1e-6);
                CHECK(rel_err(fg.scale[i][a], fd) < 2e-4);
            }
            CHECK(rel_err(fg.alpha[i], central_diff(loss, &attrs.alpha[i], 1e-6)) < 2e-4);
        }
    }
}

TEST_CASE("thread pool does not change forward pixels") {
    std::mt19937_64 rng(19);
    const Camera cam = test_camera(16, 60.0);
    const FrameAttributes attrs = random_scene(rng, 20);
    const auto proj = project(attrs, cam);
    ThreadPool pool(4);
    const Image seq = blend(proj, cam.width, cam.height, Vec3(0.1, 0.1, 0.1));
    const Image par = blend(proj, cam.width, cam.height, Vec3(0.1, 0.1, 0.1), nullptr, &pool);
    for (size_t i = 0; i < seq.data.size(); ++i) CHECK(seq.data[i] == par.data[i]);
}
