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

#include <cstdint>
#include <span>
#include <vector>

#include "ctav/avatar.hpp"
#include "ctav/image.hpp"

namespace ctav {

/// Camera-plane footprint of one splat.
struct Projected2DGaussian {
    Vec2 mean = Vec2::Zero();       // pixels
    Mat2 cov = Mat2::Identity();    // pixels^2, regularized
    double depth = 0.0;             // camera z
    Vec3 rgb = Vec3::Zero();
    double alpha = 0.0;
    int splat_index = 0;            // index into the FrameAttributes arrays
};

/// Near-plane depth below which splats are dropped.
inline constexpr double kNearPlane = 0.01;
/// Screen-space covariance dilation (pixels^2).
inline constexpr double kCovRegularizer = 0.3;
/// Contributions below this blending weight are skipped.
inline constexpr double kMinBlendWeight = 1.0 / 255.0;

/// Perspective projection of all splats; splats with camera z <= kNearPlane
/// are dropped. Sigma_2D = J W Sigma W^T J^T + kCovRegularizer * I.
std::vector<Projected2DGaussian> project(const FrameAttributes& attrs,
                                         const Camera& cam);

/// Per-pixel contributor record kept by the forward pass for the exact
/// reverse recurrence.
struct BlendEntry {
    std::uint32_t gauss = 0;  // index into the projected list
    double weight = 0.0;      // alpha * exp(-m/2)
};

struct BlendCache {
    int width = 0, height = 0;
    std::vector<std::vector<BlendEntry>> per_pixel;
    std::vector<Mat2> inv_cov;  // per projected gaussian
};

/// Depth-sorts (ascending, ties to the lower splat index) and composites
/// front to back; the remaining transmittance takes the background color.
Image blend(std::span<const Projected2DGaussian> gaussians, int width, int height,
            const Vec3& background, BlendCache* cache = nullptr,
            ThreadPool* pool = nullptr);

/// Gradients w.r.t. the projected-gaussian attributes, indexed like the
/// projected list passed to blend.
struct RasterGrads {
    std::vector<Vec2> mean;
    std::vector<Mat2> cov;
    std::vector<Vec3> rgb;
    std::vector<double> alpha;

    void resize_zero(size_t n);
};

/// Exact reverse of the compositing recurrence using the cached contributor
/// lists.
RasterGrads blend_backward(std::span<const Projected2DGaussian> gaussians,
                           const BlendCache& cache, const Image& loss_grad,
                           const Vec3& background, ThreadPool* pool = nullptr);

/// Chains RasterGrads through the projection into per-splat world-space
/// gradients (position, rotation matrix, scale, color, opacity).
void project_backward(const FrameAttributes& attrs, const Camera& cam,
                      std::span<const Projected2DGaussian> gaussians,
                      const RasterGrads& upstream, FrameGrads& out,
                      ThreadPool* pool = nullptr);

}  // namespace ctav
