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

#include "ctav/fields.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace ctav;
using namespace ctav::test;

namespace {

Bbox unit_box() { return Bbox{Vec3(-1, -1, -1), Vec3(1, 1, 1)}; }

Triplane random_triplane(std::mt19937_64& rng, int res = 4, int cxy = 3,
                         int cside = 2) {
    Triplane tp(res, cxy, cside, unit_box());
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (auto* g : {&tp.xy, &tp.xz, &tp.yz}) {
        for (double& v : g->data) v = d(rng);
    }
    return tp;
}

FeatureLineTriple random_triple(std::mt19937_64& rng, int res = 8, int ch = 3) {
    FeatureLineTriple lt(res, ch, unit_box());
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (auto* g : {&lt.x, &lt.y, &lt.z}) {
        for (double& v : g->data) v = d(rng);
    }
    return lt;
}

Vec3 node_position(const Bbox& bb, int res, int ix, int iy, int iz) {
    const Vec3 e = bb.extent();
    return Vec3(bb.min.x() + e.x() * ix / (res - 1),
                bb.min.y() + e.y() * iy / (res - 1),
                bb.min.z() + e.z() * iz / (res - 1));
}

}  // namespace

TEST_CASE("triplane sampling is exact at grid nodes") {
    std::mt19937_64 rng(42);
    const int res = 5;
    const Triplane tp = random_triplane(rng, res);
    for (int ix = 0; ix < res; ++ix) {
        for (int iy = 0; iy < res; ++iy) {
            const int iz = (ix + iy) % res;
            const Vec3 p = node_position(tp.bounds, res, ix, iy, iz);
            std::vector<double> out(tp.feature_dim());
            triplane_sample(tp, p, out);
            for (int c = 0; c < tp.xy.channels; ++c) {
                CHECK(out[c] == tp.xy.at(ix, iy, c));  // bit exact at knots
            }
            for (int c = 0; c < tp.xz.channels; ++c) {
                CHECK(out[tp.xy.channels + c] == tp.xz.at(ix, iz, c));
            }
        }
    }
}

TEST_CASE("constant grids reproduce the constant everywhere") {
    Triplane tp(4, 2, 2, unit_box());
    for (auto* g : {&tp.xy, &tp.xz, &tp.yz}) {
        std::fill(g->data.begin(), g->data.end(), 0.625);
    }
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec3 p = 1.4 * random_unit_vec3(rng);  // may leave the box: clamped
        std::vector<double> out(tp.feature_dim());
        triplane_sample(tp, p, out);
        for (double v : out) CHECK(v == doctest::Approx(0.625).epsilon(1e-15));
    }
}

TEST_CASE("triplane matches the scalar bilinear oracle") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const Triplane tp = random_triplane(rng);
        const Vec3 p(uniform(rng, -1.2, 1.2), uniform(rng, -1.2, 1.2),
                     uniform(rng, -1.2, 1.2));
        std::vector<double> out(tp.feature_dim());
        triplane_sample(tp, p, out);
        const std::vector<double> ref = oracle::triplane_sample_ref(tp, p);
        REQUIRE(out.size() == ref.size());
        for (size_t i = 0; i < out.size(); ++i) CHECK(rel_err(out[i], ref[i]) < 1e-12);
    }
}

TEST_CASE("triplane sampling is linear in the grids") {
    std::mt19937_64 rng(31);
    const Triplane a = random_triplane(rng);
    const Triplane b = random_triplane(rng);
    const double ca = 0.3, cb = -1.7;
    Triplane mix = a;
    for (int g = 0; g < 3; ++g) {
        auto& mg = g == 0 ? mix.xy : (g == 1 ? mix.xz : mix.yz);
        const auto& ag = g == 0 ? a.xy : (g == 1 ? a.xz : a.yz);
        const auto& bg = g == 0 ? b.xy : (g == 1 ? b.xz : b.yz);
        for (size_t i = 0; i < mg.data.size(); ++i) {
            mg.data[i] = ca * ag.data[i] + cb * bg.data[i];
        }
    }
    for (int trial = 0; trial < 20; ++trial) {
        const Vec3 p = random_unit_vec3(rng) * 0.8;
        std::vector<double> om(mix.feature_dim()), oa(a.feature_dim()), ob(b.feature_dim());
        triplane_sample(mix, p, om);
        triplane_sample(a, p, oa);
        triplane_sample(b, p, ob);
        for (size_t i = 0; i < om.size(); ++i) {
            CHECK(rel_err(om[i], ca * oa[i] + cb * ob[i]) < 1e-12);
        }
    }
}

TEST_CASE("triplane backward: node concentration and finite differences") {
    std::mt19937_64 rng(77);
    {
        const int res = 4;
        Triplane tp = random_triplane(rng, res);
        Triplane grad(res, tp.xy.channels, tp.xz.channels, tp.bounds);
        Vec3 gp = Vec3::Zero();
        std::vector<double> up(tp.feature_dim(), 1.0);
        const Vec3 p = node_position(tp.bounds, res, 1, 2, 3);
        triplane_sample_backward(tp, p, up, grad, gp);
        // The xy plane gradient sits on node (1,2) with weight 1.
        for (int c = 0; c < tp.xy.channels; ++c) {
            CHECK(grad.xy.at(1, 2, c) == doctest::Approx(1.0).epsilon(1e-15));
        }
        double total = 0;
        for (double v : grad.xy.data) total += std::abs(v);
        CHECK(total == doctest::Approx(tp.xy.channels).epsilon(1e-12));
    }

    for (int trial = 0; trial < 100; ++trial) {
        Triplane tp = random_triplane(rng);
        const Vec3 p(uniform(rng, -0.85, 0.85), uniform(rng, -0.85, 0.85),
                     uniform(rng, -0.85, 0.85));
        std::vector<double> up(tp.feature_dim());
        for (double& v : up) v = uniform(rng, -1, 1);

        Triplane grad(tp.resolution(), tp.xy.channels, tp.xz.channels, tp.bounds);
        grad.set_zero();
        Vec3 gp = Vec3::Zero();
        triplane_sample_backward(tp, p, up, grad, gp);

        const auto value = [&] {
            std::vector<double> out(tp.feature_dim());
            triplane_sample(tp, p, out);
            double s = 0;
            for (size_t i = 0; i < out.size(); ++i) s += up[i] * out[i];
            return s;
        };
        // Grid entries (a purely linear dependence).
        std::uniform_int_distribution<size_t> pick(0, tp.xy.data.size() - 1);
        for (int k = 0; k < 4; ++k) {
            const size_t idx = pick(rng);
            const double fd = central_diff(value, &tp.xy.data[idx], 1e-6);
            CHECK(rel_err(grad.xy.data[idx], fd) < 1e-6);
        }
        // Position (interior, away from cell boundaries by construction of
        // the random draw with probability ~1; tolerance per contract).
        Vec3 probe = p;
        for (int a = 0; a < 3; ++a) {
            const double fd = central_diff(
                [&] {
                    std::vector<double> out(tp.feature_dim());
                    triplane_sample(tp, probe, out);
                    double s = 0;
                    for (size_t i = 0; i < out.size(); ++i) s += up[i] * out[i];
                    return s;
                },
                &probe[a], 1e-7);
            CHECK(rel_err(gp[a], fd) < 1e-5);
        }
    }
}

TEST_CASE("line sampling: knot exactness, zeros, oracle") {
    std::mt19937_64 rng(55);
    {
        const int res = 8;
        FeatureLineTriple lt = random_triple(rng, res);
        const Vec3 p = node_position(lt.bounds, res, 3, 0, 0);
        std::vector<double> out(lt.feature_dim());
        line_sample(lt, p, out);
        for (int c = 0; c < lt.channels(); ++c) CHECK(out[c] == lt.x.at(3, c));
    }
    {
        FeatureLineTriple lt(6, 4, unit_box());
        std::vector<double> out(lt.feature_dim());
        line_sample(lt, Vec3(0.2, -0.4, 0.9), out);
        for (double v : out) CHECK(v == 0.0);
    }
    for (int trial = 0; trial < 100; ++trial) {
        const FeatureLineTriple lt = random_triple(rng);
        const Vec3 p(uniform(rng, -1.3, 1.3), uniform(rng, -1.3, 1.3),
                     uniform(rng, -1.3, 1.3));
        std::vector<double> out(lt.feature_dim());
        line_sample(lt, p, out);
        const auto ref = oracle::line_sample_ref(lt, p);
        for (size_t i = 0; i < out.size(); ++i) CHECK(rel_err(out[i], ref[i]) < 1e-12);
    }
}

TEST_CASE("line backward: two columns per axis and finite differences") {
    std::mt19937_64 rng(63);
    {
        FeatureLineTriple lt = random_triple(rng);
        FeatureLineTriple grad(lt.resolution(), lt.channels(), lt.bounds);
        Vec3 gp = Vec3::Zero();
        std::vector<double> up(lt.feature_dim(), 1.0);
        line_sample_backward(lt, Vec3(0.123, -0.456, 0.789), up, grad, gp);
        for (const auto* g : {&grad.x, &grad.y, &grad.z}) {
            int touched = 0;
            for (int i = 0; i < g->res; ++i) {
                bool any = false;
                for (int c = 0; c < g->channels; ++c) any |= g->at(i, c) != 0.0;
                touched += any;
            }
            CHECK(touched <= 2);
        }
    }
    for (int trial = 0; trial < 100; ++trial) {
        FeatureLineTriple lt = random_triple(rng);
        const Vec3 p(uniform(rng, -0.9, 0.9), uniform(rng, -0.9, 0.9),
                     uniform(rng, -0.9, 0.9));
        std::vector<double> up(lt.feature_dim());
        for (double& v : up) v = uniform(rng, -1, 1);
        FeatureLineTriple grad(lt.resolution(), lt.channels(), lt.bounds);
        Vec3 gp = Vec3::Zero();
        line_sample_backward(lt, p, up, grad, gp);

        std::uniform_int_distribution<size_t> pick(0, lt.x.data.size() - 1);
        for (int k = 0; k < 3; ++k) {
            const size_t idx = pick(rng);
            const double fd = central_diff(
                [&] {
                    std::vector<double> out(lt.feature_dim());
                    line_sample(lt, p, out);
                    double s = 0;
                    for (size_t i = 0; i < out.size(); ++i) s += up[i] * out[i];
                    return s;
                },
                &lt.x.data[idx], 1e-6);
            CHECK(rel_err(grad.x.data[idx], fd) < 1e-6);
        }
        Vec3 probe = p;
        for (int a = 0; a < 3; ++a) {
            const double fd = central_diff(
                [&] {
                    std::vector<double> out(lt.feature_dim());
                    line_sample(lt, probe, out);
                    double s = 0;
                    for (size_t i = 0; i < out.size(); ++i) s += up[i] * out[i];
                    return s;
                },
                &probe[a], 1e-7);
            CHECK(rel_err(gp[a], fd) < 1e-5);
        }
    }
}

TEST_CASE("out-of-box positions clamp and get zero position gradient") {
    std::mt19937_64 rng(99);
    const Triplane tp = random_triplane(rng);
    const Vec3 outside(2.5, -3.0, 0.2);
    const Vec3 clamped(1.0, -1.0, 0.2);
    std::vector<double> a(tp.feature_dim()), b(tp.feature_dim());
    triplane_sample(tp, outside, a);
    triplane_sample(tp, clamped, b);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    Triplane grad(tp.resolution(), tp.xy.channels, tp.xz.channels, tp.bounds);
    Vec3 gp = Vec3::Zero();
    std::vector<double> up(tp.feature_dim(), 1.0);
    triplane_sample_backward(tp, outside, up, grad, gp);
    CHECK(gp.x() == 0.0);
    CHECK(gp.y() == 0.0);
    CHECK(gp.z() != 0.0);  // interior axis keeps its gradient
}
