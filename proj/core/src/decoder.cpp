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
#include "ctav/decoder.hpp"

#include <cmath>

namespace ctav {

namespace {

constexpr double kPi = 3.14159265358979323846;

void apply_head(Eigen::MatrixXd& z, HeadActivation head) {
    switch (head) {
        case HeadActivation::Linear:
            break;
        case HeadActivation::Sigmoid:
            z = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
            break;
        case HeadActivation::Tanh:
            z = z.unaryExpr([](double v) { return std::tanh(v); });
            break;
    }
}

}  // namespace

size_t MlpParams::parameter_count() const {
    size_t n = 0;
    for (const auto& l : layers) {
        n += static_cast<size_t>(l.W.size()) + static_cast<size_t>(l.b.size());
    }
    return n;
}

void MlpParams::set_zero() {
    for (auto& l : layers) {
        l.W.setZero();
        l.b.setZero();
    }
}

MlpParams make_mlp(int input_dim, const std::vector<int>& hidden, int output_dim,
                   HeadActivation head, std::mt19937_64& rng) {
    if (input_dim <= 0 || output_dim <= 0) {
        throw ConfigInvalid("mlp dims must be positive");
    }
    MlpParams p;
    p.head = head;
    int in = input_dim;
    std::vector<int> dims = hidden;
    dims.push_back(output_dim);
    for (int out : dims) {
        if (out <= 0) throw ConfigInvalid("mlp hidden dims must be positive");
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        MlpParams::Layer layer;
        layer.W.resize(out, in);
        for (int r = 0; r < out; ++r) {
            for (int c = 0; c < in; ++c) {
                layer.W(r, c) = static_cast<double>(static_cast<float>(dist(rng)));
            }
        }
        layer.b = Eigen::VectorXd::Zero(out);
        p.layers.push_back(std::move(layer));
        in = out;
    }
    return p;
}

Eigen::VectorXd posenc(const Vec3& v, const PosEncConfig& cfg) {
    Eigen::VectorXd out(cfg.output_dim());
    int o = 0;
    if (cfg.include_input) {
        out[o++] = v.x();
        out[o++] = v.y();
        out[o++] = v.z();
    }
    double freq = kPi;
    for (int k = 0; k < cfg.n_freq; ++k, freq *= 2.0) {
        for (int a = 0; a < 3; ++a) {
            out[o++] = std::sin(freq * v[a]);
            out[o++] = std::cos(freq * v[a]);
        }
    }
    return out;
}

void posenc_backward(const Vec3& v, const PosEncConfig& cfg,
                     const Eigen::VectorXd& upstream, Vec3& grad_v) {
    if (upstream.size() != cfg.output_dim()) {
        throw DimensionMismatch("posenc_backward upstream size");
    }
    int o = 0;
    if (cfg.include_input) {
        grad_v.x() += upstream[0];
        grad_v.y() += upstream[1];
        grad_v.z() += upstream[2];
        o = 3;
    }
    double freq = kPi;
    for (int k = 0; k < cfg.n_freq; ++k, freq *= 2.0) {
        for (int a = 0; a < 3; ++a) {
            grad_v[a] += upstream[o++] * freq * std::cos(freq * v[a]);
            grad_v[a] -= upstream[o++] * freq * std::sin(freq * v[a]);
        }
    }
}

Eigen::MatrixXd mlp_forward_batch(const MlpParams& params, const Eigen::MatrixXd& X,
                                  MlpBatchCache* cache) {
    if (params.layers.empty()) throw ConfigInvalid("mlp has no layers");
    if (X.cols() != params.input_dim()) {
        throw DimensionMismatch("mlp_forward input dim");
    }
    if (cache) {
        cache->input = X;
        cache->pre.assign(params.layers.size(), {});
        cache->post.assign(params.layers.size(), {});
    }
    Eigen::MatrixXd a = X;
    for (size_t i = 0; i < params.layers.size(); ++i) {
        const auto& l = params.layers[i];
        Eigen::MatrixXd z = a * l.W.transpose();
        z.rowwise() += l.b.transpose();
        if (cache) cache->pre[i] = z;
        if (i + 1 < params.layers.size()) {
            a = z.cwiseMax(0.0);  // ReLU
        } else {
            apply_head(z, params.head);
            a = std::move(z);
        }
        if (cache) cache->post[i] = a;
    }
    return a;
}

Eigen::MatrixXd mlp_backward_batch(const MlpParams& params, const MlpBatchCache& cache,
                                   const Eigen::MatrixXd& upstream, MlpParams& grads) {
    const size_t L = params.layers.size();
    if (cache.pre.size() != L) throw DimensionMismatch("mlp cache layer count");
    if (grads.layers.size() != L) throw DimensionMismatch("mlp grads layer count");

    // Head activation derivative in terms of the cached outputs.
    Eigen::MatrixXd dz;
    const Eigen::MatrixXd& y = cache.post[L - 1];
    switch (params.head) {
        case HeadActivation::Linear:
            dz = upstream;
            break;
        case HeadActivation::Sigmoid:
            dz = upstream.cwiseProduct(
                y.cwiseProduct(Eigen::MatrixXd::Ones(y.rows(), y.cols()) - y));
            break;
        case HeadActivation::Tanh:
            dz = upstream.cwiseProduct(
                Eigen::MatrixXd::Ones(y.rows(), y.cols()) - y.cwiseProduct(y));
            break;
    }

    for (size_t i = L; i-- > 0;) {
        const auto& l = params.layers[i];
        const Eigen::MatrixXd& a_in = (i == 0) ? cache.input : cache.post[i - 1];
        grads.layers[i].W.noalias() += dz.transpose() * a_in;
        grads.layers[i].b.noalias() += dz.colwise().sum().transpose();
        if (i == 0) {
            return dz * l.W;
        }
        Eigen::MatrixXd da = dz * l.W;
        // ReLU gate from the cached pre-activation of layer i-1.
        dz = da.cwiseProduct((cache.pre[i - 1].array() > 0.0).cast<double>().matrix());
    }
    return {};
}

Eigen::VectorXd mlp_forward(const MlpParams& params, const Eigen::VectorXd& x,
                            MlpBatchCache* cache) {
    const Eigen::MatrixXd y = mlp_forward_batch(params, x.transpose(), cache);
    return y.row(0).transpose();
}

Eigen::VectorXd mlp_backward(const MlpParams& params, const MlpBatchCache& cache,
                             const Eigen::VectorXd& upstream, MlpParams& grads) {
    const Eigen::MatrixXd dx =
        mlp_backward_batch(params, cache, upstream.transpose(), grads);
    return dx.row(0).transpose();
}

Vec3 decode_color(std::span<const double> triplane_feature, const Vec3& view_canonical,
                  const MlpParams& params, const PosEncConfig& cfg) {
    const int nf = static_cast<int>(triplane_feature.size());
    if (nf + cfg.output_dim() != params.input_dim()) {
        throw DimensionMismatch("decode_color input dims");
    }
    Eigen::VectorXd x(params.input_dim());
    for (int i = 0; i < nf; ++i) x[i] = triplane_feature[i];
    x.tail(cfg.output_dim()) = posenc(view_canonical, cfg);
    const Eigen::VectorXd y = mlp_forward(params, x);
    if (y.size() != 3) throw DimensionMismatch("color decoder must output 3 values");
    return Vec3(y[0], y[1], y[2]);
}

double decode_opacity_offset(std::span<const double> expr_feature,
                             std::span<const double> jaw_feature,
                             const MlpParams& params) {
    const int nb = static_cast<int>(expr_feature.size());
    const int nr = static_cast<int>(jaw_feature.size());
    if (nb + nr != params.input_dim()) {
        throw DimensionMismatch("decode_opacity_offset input dims");
    }
    Eigen::VectorXd x(nb + nr);
    for (int i = 0; i < nb; ++i) x[i] = expr_feature[i];
    for (int i = 0; i < nr; ++i) x[nb + i] = jaw_feature[i];
    const Eigen::VectorXd y = mlp_forward(params, x);
    if (y.size() != 1) {
        throw DimensionMismatch("opacity decoder must output 1 value");
    }
    return y[0];
}

}  // namespace ctav
