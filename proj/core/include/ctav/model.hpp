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
#include <string>
#include <vector>

#include "ctav/avatar.hpp"
#include "ctav/blendmix.hpp"
#include "ctav/config.hpp"
#include "ctav/decoder.hpp"
#include "ctav/fields.hpp"
#include "ctav/synthrig.hpp"

namespace ctav {

/// The serializable avatar bundle: splats, canonical triplane, feature-line
/// bank, the two decoders, the rig recipe, and the hyperparameter block.
struct AvatarModel {
    Config config;
    SyntheticRig rig;
    SplatSet splats;
    Triplane triplane;
    FeatureLineBank lines;
    MlpParams color_mlp;
    MlpParams opacity_mlp;
    PosEncConfig posenc;
    OffsetMode offset_mode = OffsetMode::Opacity;

    // Derived canonical-space caches (not serialized).
    std::vector<Vec3> canonical_vertices;
    std::vector<TriangleFrame> canonical_frames;

    bool lines_enabled() const { return !lines.empty() && !opacity_mlp.layers.empty(); }
    int line_expression_count() const { return lines.expression_count(); }

    /// Rebuilds the neutral mesh and its triangle frames.
    void refresh_canonical_cache();
    /// Cross-reference validation: face ids, decoder dims, shared line shapes.
    void validate() const;
};

/// Builds an initialized model from a rig and a config. jaw_samples feed the
/// farthest-point extraction of jaw bases; when fewer than requested are
/// given, evenly spaced rotations about the rig's jaw axis fill in.
AvatarModel build_model(const SyntheticRig& rig, const Config& cfg,
                        std::span<const UnitQuaternion> jaw_samples,
                        std::uint64_t seed);

/// Gradient mirror of the trainable tensors.
struct SplatGrads {
    std::vector<double> mu_local, quat_raw, log_scale, alpha_logit;
    void resize_zero(int n);
};

struct ModelGrads {
    SplatGrads splats;
    Triplane triplane;
    std::vector<FeatureLineTriple> expr_lines;
    std::vector<FeatureLineTriple> jaw_lines;
    MlpParams color_mlp;
    MlpParams opacity_mlp;

    void set_zero();
};

ModelGrads make_grads(const AvatarModel& model);

enum class ParamClass : std::uint8_t { Features = 0, Mlp = 1, Geometry = 2 };

/// A contiguous slice of trainable values with its learning-rate class.
struct ParamGroup {
    std::string name;
    ParamClass cls = ParamClass::Features;
    std::span<double> values;
};

/// Parameter groups in a fixed order; parameter_groups(model) and
/// gradient_groups(grads) align element for element.
std::vector<ParamGroup> parameter_groups(AvatarModel& model);
std::vector<ParamGroup> gradient_groups(ModelGrads& grads);

}  // namespace ctav
