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

#include <span>

#include "ctav/avatar.hpp"
#include "ctav/image.hpp"
#include "ctav/model.hpp"

namespace ctav {

/// Loss mix weights and thresholds.
struct LossWeights {
    double lambda = 0.2;        // D-SSIM share of the image loss
    double lambda_pos = 0.01;
    double lambda_scale = 1.0;
    double lambda_op = 1.0;
    double tau = 0.0;           // static/dynamic triangle translation threshold
    double eps_pos = 1.0;       // hinge threshold on |mu'| (local units)
    double eps_scale = 0.6;     // hinge threshold on max s' (local units)

    void validate() const;
};

/// Mean SSIM between two same-sized images: 11x11 Gaussian window
/// (sigma 1.5), C1 = 0.01^2, C2 = 0.03^2, windows fully inside the image.
/// For images smaller than the window the window shrinks to the largest odd
/// size that fits. Optionally accumulates d(SSIM)/d(a) into grad_a.
double ssim(const Image& a, const Image& b, Image* grad_a = nullptr);

struct ImageLossResult {
    double value = 0.0;
    double l1 = 0.0;
    double dssim = 0.0;
};

/// (1 - lambda) * L1 + lambda * (1 - SSIM)/2, with the exact gradient
/// written (not accumulated) into `grad` when given.
ImageLossResult loss_image(const Image& rendered, const Image& target, double lambda,
                           Image* grad = nullptr);

struct GeomLossResult {
    double value = 0.0;
    double pos_term = 0.0;    // unweighted mean hinge on |mu'|
    double scale_term = 0.0;  // unweighted mean hinge on max component of s'
};

/// lambda_pos * mean(max(|mu'| - eps_pos, 0)) +
/// lambda_scale * mean(max(max_k s'_k - eps_scale, 0)); accumulates into
/// grads when given.
GeomLossResult loss_geom(const SplatSet& splats, const LossWeights& weights,
                         SplatGrads* grads = nullptr);

/// Adaptive truncated opacity penalty: mean over splats of
/// lambda_op * |dAlpha| * w, w = 1 iff the bound face translated by at most
/// tau from neutral. Accumulates d/d(dAlpha) into grad_delta_alpha when given.
double loss_opacity_penalty(std::span<const double> delta_alpha,
                            std::span<const int> splat_face,
                            std::span<const Vec3> face_translation,
                            const LossWeights& weights,
                            std::span<double> grad_delta_alpha = {});

}  // namespace ctav
