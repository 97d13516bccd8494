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

#include <iosfwd>
#include <optional>
#include <string>

#include "ctav/dataset.hpp"
#include "ctav/losses.hpp"
#include "ctav/model.hpp"
#include "ctav/raster.hpp"

namespace ctav {

struct LossBreakdown {
    double image = 0.0;
    double geom = 0.0;
    double op = 0.0;
    double total = 0.0;
};

struct PipelineOptions {
    ThreadPool* pool = nullptr;
    bool cull_lines = true;
};

/// Differentiable render-and-loss path for one model. Holds reusable frame
/// caches; one instance serves one optimization thread.
class Pipeline {
public:
    Pipeline(AvatarModel& model, const LossWeights& weights, const Vec3& background,
             PipelineOptions opts = {});

    Image render(const ExpressionInput& expr, const std::vector<Vec3>& deformed_verts,
                 const Camera& cam);

    /// Full training loss at the current parameters (no gradients).
    LossBreakdown loss(const ExpressionInput& expr,
                       const std::vector<Vec3>& deformed_verts, const Camera& cam,
                       const Image& target);

    /// Loss plus gradients for every trainable tensor. Zeroes `grads` first.
    LossBreakdown forward_backward(const ExpressionInput& expr,
                                   const std::vector<Vec3>& deformed_verts,
                                   const Camera& cam, const Image& target,
                                   ModelGrads& grads);

    /// Opacity offsets of the latest pass (instrumentation).
    const AssembleCache& cache() const { return assemble_cache_; }
    AvatarModel& model() { return model_; }
    const LossWeights& weights() const { return weights_; }

private:
    LossBreakdown run(const ExpressionInput& expr, const std::vector<Vec3>& verts,
                      const Camera& cam, const Image& target, ModelGrads* grads);

    AvatarModel& model_;
    LossWeights weights_;
    Vec3 background_;
    PipelineOptions opts_;
    AssembleCache assemble_cache_;
    BlendCache blend_cache_;
};

/// Loss weights assembled from config keys; tau comes from loss.tau_fraction
/// scaled by the rig bounding-box diagonal.
LossWeights loss_weights_from_config(const Config& cfg, const SyntheticRig& rig);

struct TrainResult {
    double holdout_psnr = 0.0;
    double holdout_ssim = 0.0;
    double holdout_large_psnr = 0.0;
    double holdout_small_psnr = 0.0;
    double static_mean_abs_dalpha = 0.0;  // over holdout frames, static-region splats
    double final_image_loss = 0.0;
    double initial_image_loss = 0.0;
    int iterations = 0;
};

/// Samples frames (class-balanced by default), renders, backpropagates
/// through all modules, and steps Adam with per-group learning rates. The
/// metrics log receives `iter,L_image,L_geom,L_op,psnr_holdout` lines.
AvatarModel train(const Dataset& ds, const Config& cfg, std::ostream* metrics_log,
                  TrainResult* result = nullptr);

/// Mean |delta alpha| over splats bound to all-static faces, averaged over
/// the given frames.
double static_region_mean_abs_dalpha(AvatarModel& model, const Dataset& ds,
                                     std::span<const int> frames,
                                     ThreadPool* pool = nullptr);

struct AblateArm {
    std::string name;
    Config cfg;
    TrainResult result;
};

/// Paired ablation arms with identical seeds. Known studies: "lines",
/// "penalty", "balanced", "offsets". When out_dir is nonempty, one metrics
/// log per arm is written there (config dumped in '#' header lines).
std::vector<AblateArm> run_ablations(const Dataset& ds, const Config& base,
                                     const std::vector<std::string>& studies,
                                     const std::string& out_dir);

}  // namespace ctav
