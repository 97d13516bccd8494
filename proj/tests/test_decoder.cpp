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

#include "ctav/decoder.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace ctav;
using namespace ctav::test;

TEST_CASE("posenc layout and exact values") {
    {
        const PosEncConfig cfg{2, false};
        const Eigen::VectorXd e = posenc(Vec3::Zero(), cfg);
        REQUIRE(e.size() == 12);
        for (int i = 0; i < e.size(); i += 2) {
            CHECK(e[i] == 0.0);      // sin slots
            CHECK(e[i + 1] == 1.0);  // cos slots
        }
    }
    {
        const PosEncConfig cfg{0, true};
        const Vec3 v(0.3, -0.7, 0.64);
        const Eigen::VectorXd e = posenc(v, cfg);
        REQUIRE(e.size() == 3);
        CHECK(e[0] == v.x());
        CHECK(e[1] == v.y());
        CHECK(e[2] == v.z());
    }
    {
        const PosEncConfig cfg{1, false};
        const Eigen::VectorXd e = posenc(Vec3(1, 0, 0), cfg);
        REQUIRE(e.size() == 6);
        CHECK(std::abs(e[0]) < 1e-15);              // sin(pi)
        CHECK(e[1] == doctest::Approx(-1.0));       // cos(pi)
        CHECK(e[2] == 0.0);                         // sin(0)
        CHECK(e[3] == 1.0);
    }
    CHECK(PosEncConfig{4, true}.output_dim() == 27);
}

TEST_CASE("posenc backward matches finite differences") {
    std::mt19937_64 rng(3);
    const PosEncConfig cfg{3, true};
    for (int trial = 0; trial < 100; ++trial) {
        Vec3 v = random_unit_vec3(rng);
        Eigen::VectorXd up(cfg.output_dim());
        for (int i = 0; i < up.size(); ++i) up[i] = uniform(rng, -1, 1);
        Vec3 grad = Vec3::Zero();
        posenc_backward(v, cfg, up, grad);
        for (int a = 0; a < 3; ++a) {
            const double fd = central_diff(
                [&] { return up.dot(posenc(v, cfg)); }, &v[a], 1e-7);
            CHECK(rel_err(grad[a], fd) < 1e-6);
        }
    }
}

TEST_CASE("mlp forward basics") {
    std::mt19937_64 rng(5);
    {
        // Zero weights, bias b, single layer -> head(b).
        MlpParams p = make_mlp(4, {}, 2, HeadActivation::Sigmoid, rng);
        p.layers[0].W.setZero();
        p.layers[0].b << 0.0, 2.0;
        const Eigen::VectorXd y = mlp_forward(p, Eigen::VectorXd::Ones(4));
        CHECK(y[0] == doctest::Approx(0.5));
        CHECK(y[1] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
    }
    {
        // ReLU clamps a negative hidden pre-activation.
        MlpParams p = make_mlp(1, {1}, 1, HeadActivation::Linear, rng);
        p.layers[0].W(0, 0) = 1.0;
        p.layers[0].b[0] = 0.0;
        p.layers[1].W(0, 0) = 1.0;
        p.layers[1].b[0] = 0.0;
        Eigen::VectorXd x(1);
        x << -3.0;
        CHECK(mlp_forward(p, x)[0] == 0.0);
        x << 3.0;
        CHECK(mlp_forward(p, x)[0] == 3.0);
    }
    {
        MlpParams p = make_mlp(4, {8, 8}, 3, HeadActivation::Tanh, rng);
        Eigen::VectorXd x(5);
        CHECK_THROWS_AS(mlp_forward(p, x), DimensionMismatch);
    }
}

TEST_CASE("mlp forward matches the GEMV oracle") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const auto head = static_cast<HeadActivation>(trial % 3);
        MlpParams p = make_mlp(5, {7, 6}, 3, head, rng);
        for (auto& l : p.layers) {
            for (int r = 0; r < l.b.size(); ++r) l.b[r] = uniform(rng, -0.5, 0.5);
        }
        Eigen::VectorXd x(5);
        for (int i = 0; i < 5; ++i) x[i] = uniform(rng, -2, 2);
        const Eigen::VectorXd y = mlp_forward(p, x);
        const std::vector<double> ref =
            oracle::mlp_forward_ref(p, std::vector<double>(x.data(), x.data() + 5));
        for (int i = 0; i < y.size(); ++i) CHECK(rel_err(y[i], ref[i]) < 1e-12);
    }
}

TEST_CASE("batched forward equals per-sample forward") {
    std::mt19937_64 rng(9);
    MlpParams p = make_mlp(6, {16, 16}, 4, HeadActivation::Sigmoid, rng);
    Eigen::MatrixXd X(10, 6);
    for (int i = 0; i < X.size(); ++i) X(i / 6, i % 6) = uniform(rng, -1, 1);
    const Eigen::MatrixXd Y = mlp_forward_batch(p, X);
    for (int r = 0; r < 10; ++r) {
        const Eigen::VectorXd y = mlp_forward(p, X.row(r).transpose());
        CHECK((Y.row(r).transpose() - y).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("mlp backward matches central differences on every weight") {
    std::mt19937_64 rng(11);
    MlpParams p = make_mlp(8, {8}, 1, HeadActivation::Tanh, rng);
    for (auto& l : p.layers) {
        for (int r = 0; r < l.b.size(); ++r) l.b[r] = uniform(rng, -0.3, 0.3);
    }
    Eigen::VectorXd x(8);
    for (int i = 0; i < 8; ++i) x[i] = uniform(rng, -1, 1);
    Eigen::VectorXd up(1);
    up << 1.37;

    MlpBatchCache cache;
    mlp_forward(p, x, &cache);
    MlpParams grads = p;
    grads.set_zero();
    const Eigen::VectorXd dx = mlp_backward(p, cache, up, grads);

    const auto value = [&] { return up.dot(mlp_forward(p, x)); };
    for (size_t l = 0; l < p.layers.size(); ++l) {
        auto& W = p.layers[l].W;
        for (int i = 0; i < W.size(); ++i) {
            const double fd = central_diff(value, W.data() + i, 1e-6);
            CHECK(rel_err(grads.layers[l].W.data()[i], fd) < 1e-6);
        }
        auto& b = p.layers[l].b;
        for (int i = 0; i < b.size(); ++i) {
            const double fd = central_diff(value, b.data() + i, 1e-6);
            CHECK(rel_err(grads.layers[l].b[i], fd) < 1e-6);
        }
    }
    for (int i = 0; i < x.size(); ++i) {
        const double fd = central_diff(value, &x[i], 1e-6);
        CHECK(rel_err(dx[i], fd) < 1e-5);
    }
}

TEST_CASE("mlp backward with zero upstream is all zero") {
    std::mt19937_64 rng(13);
    MlpParams p = make_mlp(4, {8, 8}, 2, HeadActivation::Sigmoid, rng);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(4);
    MlpBatchCache cache;
    mlp_forward(p, x, &cache);
    MlpParams grads = p;
    grads.set_zero();
    const Eigen::VectorXd dx =
        mlp_backward(p, cache, Eigen::VectorXd::Zero(2), grads);
    CHECK(dx.cwiseAbs().maxCoeff() == 0.0);
    for (const auto& l : grads.layers) {
        CHECK(l.W.cwiseAbs().maxCoeff() == 0.0);
        CHECK(l.b.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("decode_color: sigmoid head, view dependence, oracle composition") {
    std::mt19937_64 rng(17);
    const PosEncConfig cfg{2, true};
    {
        MlpParams p = make_mlp(4 + cfg.output_dim(), {8}, 3, HeadActivation::Sigmoid, rng);
        for (auto& l : p.layers) {
            l.W.setZero();
            l.b.setZero();
        }
        const std::vector<double> feat(4, 0.3);
        const Vec3 rgb = decode_color(feat, Vec3(0, 0, 1), p, cfg);
        CHECK(rgb.x() == doctest::Approx(0.5));
        CHECK(rgb.y() == doctest::Approx(0.5));
        CHECK(rgb.z() == doctest::Approx(0.5));
    }
    {
        MlpParams p = make_mlp(4 + cfg.output_dim(), {8}, 3, HeadActivation::Sigmoid, rng);
        const std::vector<double> feat{0.2, -0.6, 0.9, 0.1};
        const Vec3 a = decode_color(feat, Vec3(0, 0, 1), p, cfg);
        const Vec3 b = decode_color(feat, Vec3(1, 0, 0), p, cfg);
        CHECK((a - b).norm() > 1e-8);  // view direction reaches the output

        // Composition against the scalar oracles.
        const Eigen::VectorXd enc = posenc(Vec3(1, 0, 0), cfg);
        std::vector<double> x(feat);
        for (int i = 0; i < enc.size(); ++i) x.push_back(enc[i]);
        const std::vector<double> ref = oracle::mlp_forward_ref(p, x);
        CHECK(rel_err(b.x(), ref[0]) < 1e-12);
        CHECK(rel_err(b.y(), ref[1]) < 1e-12);
        CHECK(rel_err(b.z(), ref[2]) < 1e-12);
    }
}

TEST_CASE("decode_opacity_offset: tanh head and near-zero initialization") {
    std::mt19937_64 rng(19);
    {
        MlpParams p = make_mlp(12, {8}, 1, HeadActivation::Tanh, rng);
        for (auto& l : p.layers) {
            l.W.setZero();
            l.b.setZero();
        }
        const std::vector<double> lb(6, 0.4), lr(6, -0.2);
        CHECK(decode_opacity_offset(lb, lr, p) == 0.0);
    }
    {
        // Near-zero grid features through a freshly initialized decoder stay
        // tiny.
        MlpParams p = make_mlp(12, {16, 16}, 1, HeadActivation::Tanh, rng);
        std::vector<double> lb(6), lr(6);
        for (double& v : lb) v = uniform(rng, -1e-4, 1e-4);
        for (double& v : lr) v = uniform(rng, -1e-4, 1e-4);
        CHECK(std::abs(decode_opacity_offset(lb, lr, p)) < 1e-3);
    }
    {
        MlpParams p = make_mlp(12, {8}, 1, HeadActivation::Tanh, rng);
        std::vector<double> lb(6), lr(6), x;
        for (double& v : lb) v = uniform(rng, -1, 1);
        for (double& v : lr) v = uniform(rng, -1, 1);
        x = lb;
        x.insert(x.end(), lr.begin(), lr.end());
        const double got = decode_opacity_offset(lb, lr, p);
        CHECK(rel_err(got, oracle::mlp_forward_ref(p, x)[0]) < 1e-12);
        CHECK(got > -1.0);
        CHECK(got < 1.0);
    }
}
