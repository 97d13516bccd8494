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

#include <random>
#include <span>
#include <vector>

#include "ctav/geometry.hpp"

namespace ctav {

enum class HeadActivation : std::uint8_t { Linear = 0, Sigmoid = 1, Tanh = 2 };

/// Small fully connected network: affine + ReLU per hidden layer, affine +
/// head activation on the output. Weights are (out x in), y = W x + b.
struct MlpParams {
    struct Layer {
        Eigen::MatrixXd W;
        Eigen::VectorXd b;
    };
    std::vector<Layer> layers;
    HeadActivation head = HeadActivation::Linear;

    int input_dim() const { return layers.empty() ? 0 : (int)layers.front().W.cols(); }
    int output_dim() const { return layers.empty() ? 0 : (int)layers.back().W.rows(); }
    size_t parameter_count() const;
    void set_zero();
};

/// input -> hidden (xN) -> output, uniform +-1/sqrt(fan_in) weights
/// (fp32-representable values), zero biases.
MlpParams make_mlp(int input_dim, const std::vector<int>& hidden, int output_dim,
                   HeadActivation head, std::mt19937_64& rng);

/// Frequency encoding of a 3-vector: per octave k < n_freq and per component
/// a, the pair [sin(2^k pi v_a), cos(2^k pi v_a)]; optionally prefixed by v.
struct PosEncConfig {
    int n_freq = 4;
    bool include_input = true;

    int output_dim() const { return (include_input ? 3 : 0) + 6 * n_freq; }
};

Eigen::VectorXd posenc(const Vec3& v, const PosEncConfig& cfg);

/// Accumulates d(sum upstream_i * posenc_i)/dv into grad_v.
void posenc_backward(const Vec3& v, const PosEncConfig& cfg,
                     const Eigen::VectorXd& upstream, Vec3& grad_v);

/// Cached activations of a batched forward pass (rows = batch items).
struct MlpBatchCache {
    Eigen::MatrixXd input;
    std::vector<Eigen::MatrixXd> pre;   // pre-activation per layer
    std::vector<Eigen::MatrixXd> post;  // post-activation per layer
};

/// Batched forward: X is (B x input_dim), returns (B x output_dim).
Eigen::MatrixXd mlp_forward_batch(const MlpParams& params, const Eigen::MatrixXd& X,
                                  MlpBatchCache* cache = nullptr);

/// Batched reverse pass. upstream is d(loss)/d(output). Accumulates parameter
/// gradients into `grads` (same shapes as params) and returns d(loss)/d(input).
Eigen::MatrixXd mlp_backward_batch(const MlpParams& params, const MlpBatchCache& cache,
                                   const Eigen::MatrixXd& upstream, MlpParams& grads);

/// Single-sample wrappers around the batched kernels.
Eigen::VectorXd mlp_forward(const MlpParams& params, const Eigen::VectorXd& x,
                            MlpBatchCache* cache = nullptr);
Eigen::VectorXd mlp_backward(const MlpParams& params, const MlpBatchCache& cache,
                             const Eigen::VectorXd& upstream, MlpParams& grads);

/// RGB in (0,1)^3 from [triplane feature || posenc(view dir)] through a
/// sigmoid-head MLP.
Vec3 decode_color(std::span<const double> triplane_feature, const Vec3& view_canonical,
                  const MlpParams& params, const PosEncConfig& cfg);

/// Opacity offset in (-1,1) from [expression-line feature || jaw-line feature]
/// through a tanh-head MLP.
double decode_opacity_offset(std::span<const double> expr_feature,
                             std::span<const double> jaw_feature,
                             const MlpParams& params);

}  // namespace ctav
