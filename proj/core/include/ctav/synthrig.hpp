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

#include <array>
#include <cstdint>
#include <vector>

#include "ctav/fields.hpp"
#include "ctav/geometry.hpp"

namespace ctav {

enum class VertexRegion : std::uint8_t { Static = 0, Eye = 1, Jaw = 2, Other = 3 };

struct RigConfig {
    int rings = 36;     // latitude bands (vertices = rings * segments + 2)
    int segments = 68;  // longitude steps
    int n_blendshapes = 8;
};

/// Parametric head: ellipsoid base mesh (face toward +z), linear expression
/// blendshapes with truncated local support, and a rigid jaw flap rotating
/// about a pivot/axis. Deterministic per (config, seed).
struct SyntheticRig {
    RigConfig config;
    std::uint64_t seed = 0;

    std::vector<Vec3> base_vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<std::vector<Vec3>> expr_deltas;  // n_blendshapes x V
    std::vector<std::uint8_t> jaw_mask;          // per vertex
    Vec3 jaw_pivot = Vec3::Zero();
    Vec3 jaw_axis = Vec3::UnitX();
    std::vector<VertexRegion> region;

    int vertex_count() const { return static_cast<int>(base_vertices.size()); }
    int face_count() const { return static_cast<int>(faces.size()); }
    int blendshape_count() const { return config.n_blendshapes; }

    std::vector<int> eye_vertices() const;
    /// Faces whose three vertices are all labeled Static.
    std::vector<std::uint8_t> static_face_mask() const;

    /// Axis-aligned bounds of the neutral mesh.
    Bbox neutral_bounds() const;
    /// Bounds of the facial (z > 0) vertex subset of the neutral mesh.
    Bbox facial_bounds() const;
};

/// Throws ConfigInvalid when n_blendshapes < 1 or the mesh would have fewer
/// than 12 vertices.
SyntheticRig build_rig(const RigConfig& config, std::uint64_t seed);

/// v = base + sum_i beta_i * delta_i, then jaw-masked vertices rotate by
/// q_jaw about the pivot. beta must have n_blendshapes entries.
std::vector<Vec3> eval_rig(const SyntheticRig& rig, const Eigen::VectorXd& beta,
                           const UnitQuaternion& q_jaw);

}  // namespace ctav
