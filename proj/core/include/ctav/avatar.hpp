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

#include <vector>

#include "ctav/blendmix.hpp"
#include "ctav/decoder.hpp"
#include "ctav/geometry.hpp"
#include "ctav/parallel.hpp"
#include "ctav/synthrig.hpp"

namespace ctav {

struct AvatarModel;

/// Per-splat trainable attributes, structure-of-arrays. Rotations are stored
/// as raw quaternions and normalized on use; scales are log-encoded.
struct SplatSet {
    std::vector<double> mu_local;     // 3 per splat
    std::vector<double> quat_raw;     // 4 per splat (w, x, y, z)
    std::vector<double> log_scale;    // 3 per splat
    std::vector<double> alpha_logit;  // 1 per splat
    std::vector<int> face_id;         // 1 per splat

    int count() const { return static_cast<int>(face_id.size()); }
    Vec3 mu(int i) const { return Vec3(mu_local[3 * i], mu_local[3 * i + 1], mu_local[3 * i + 2]); }
    Vec3 scale_local(int i) const {
        return Vec3(std::exp(log_scale[3 * i]), std::exp(log_scale[3 * i + 1]),
                    std::exp(log_scale[3 * i + 2]));
    }
    UnitQuaternion quat(int i) const {
        return UnitQuaternion::normalized(quat_raw[4 * i], quat_raw[4 * i + 1],
                                          quat_raw[4 * i + 2], quat_raw[4 * i + 3]);
    }
    void resize(int n);
    /// Projects stored quaternions back onto the unit sphere.
    void renormalize_quats();
    /// Throws InvalidTriangleId when a face id is out of range.
    void validate(int face_count) const;
};

/// `per_face` splats on every triangle: mu' = 0, identity rotation,
/// s' = init_scale in every axis, alpha logit = logit(0.5) = 0.
SplatSet bind_splats(const SyntheticRig& rig, int per_face, double init_scale = 0.35);

/// Optional global rigid motion applied to the deformed mesh.
struct RigPose {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();
    bool is_identity() const {
        return rotation.isIdentity(0.0) && translation.isZero(0.0);
    }
};

/// Render-ready per-splat attributes for one frame.
struct FrameAttributes {
    std::vector<Vec3> mu;
    std::vector<Mat3> rot;
    std::vector<Vec3> scale;
    std::vector<Vec3> rgb;
    std::vector<double> alpha;

    int count() const { return static_cast<int>(alpha.size()); }
    void resize(int n);
};

/// Gradients flowing back into FrameAttributes (plus a direct opacity-offset
/// channel used by the truncated penalty).
struct FrameGrads {
    std::vector<Vec3> mu;
    std::vector<Mat3> rot;
    std::vector<Vec3> scale;
    std::vector<Vec3> rgb;
    std::vector<double> alpha;
    std::vector<double> delta_alpha_direct;

    void resize_zero(int n);
};

enum class OffsetMode : std::uint8_t { Opacity = 0, Geometry = 1 };

/// Per-frame intermediate state kept for the backward pass. Also the
/// instrumentation window used by tests.
struct AssembleCache {
    int n = 0;
    std::vector<TriangleFrame> deformed_frames;   // per face
    std::vector<Vec3> face_translation;           // deformed T - canonical T
    std::vector<Vec3> canonical_pos;              // sampling position p
    std::vector<Vec3> view_deformed;              // v_d (unit)
    std::vector<double> view_raw_norm;            // |mu - camera center|
    std::vector<Vec3> view_canonical;             // v_c
    std::vector<std::uint8_t> in_line_bounds;     // line-bbox culling flag
    std::vector<double> delta_alpha;              // applied opacity offset
    std::vector<double> alpha_preclamp;
    Eigen::MatrixXd color_in;                     // N x (feat + posenc)
    MlpBatchCache color_cache;
    std::vector<int> line_rows;                   // splat index per opacity row
    Eigen::MatrixXd line_in;                      // rows x (2 * 3 * n_d2)
    MlpBatchCache line_cache;
    Eigen::MatrixXd line_out;                     // rows x 1 (or x 10 in geometry mode)
    FeatureLineTriple mixed_expr, mixed_jaw;
    Eigen::VectorXd expr_weights, jaw_mix_weights;
    bool lines_active = false;
    // Geometry-offset mode: effective (offset) local attributes.
    std::vector<double> eff_mu_local, eff_quat_raw, eff_log_scale;
};

struct AssembleOptions {
    bool cull_lines = true;  // skip line decode outside the facial bounds
    ThreadPool* pool = nullptr;
};

/// Evaluates the rig at (expr, pose), places every splat with the deformed
/// triangle frame, samples the canonical fields at the neutral-mesh position,
/// decodes color and opacity offset, and composes final opacities.
FrameAttributes assemble(const AvatarModel& model, const ExpressionInput& expr,
                         const RigPose& pose, const Camera& cam,
                         AssembleCache* cache = nullptr,
                         const AssembleOptions& opts = {});

/// Variant reusing pre-deformed vertices (training caches rig evaluations).
FrameAttributes assemble_with_vertices(const AvatarModel& model,
                                       const ExpressionInput& expr,
                                       const std::vector<Vec3>& deformed_vertices,
                                       const Camera& cam, AssembleCache* cache = nullptr,
                                       const AssembleOptions& opts = {});

struct ModelGrads;

/// Reverse of assemble: consumes per-splat upstream gradients and accumulates
/// into every trainable tensor.
void assemble_backward(const AvatarModel& model, const ExpressionInput& expr,
                       const AssembleCache& cache, const FrameGrads& upstream,
                       ModelGrads& grads, const AssembleOptions& opts = {});

}  // namespace ctav
