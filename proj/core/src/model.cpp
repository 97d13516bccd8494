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
#include "ctav/model.hpp"

#include <cmath>

namespace ctav {

namespace {

std::vector<UnitQuaternion> fallback_jaw_samples(const SyntheticRig& rig, int n) {
    std::vector<UnitQuaternion> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double angle = (n == 1) ? 0.0 : -0.45 + 0.9 * i / (n - 1);
        out.push_back(UnitQuaternion::from_axis_angle(rig.jaw_axis, angle));
    }
    return out;
}

void append_mlp_groups(std::vector<ParamGroup>& groups, MlpParams& mlp,
                       const std::string& prefix) {
    for (size_t l = 0; l < mlp.layers.size(); ++l) {
        auto& layer = mlp.layers[l];
        groups.push_back({prefix + ".W" + std::to_string(l), ParamClass::Mlp,
                          {layer.W.data(), static_cast<size_t>(layer.W.size())}});
        groups.push_back({prefix + ".b" + std::to_string(l), ParamClass::Mlp,
                          {layer.b.data(), static_cast<size_t>(layer.b.size())}});
    }
}

void append_triple_groups(std::vector<ParamGroup>& groups,
                          std::vector<FeatureLineTriple>& triples,
                          const std::string& prefix) {
    for (size_t i = 0; i < triples.size(); ++i) {
        auto& t = triples[i];
        const std::string base = prefix + std::to_string(i);
        groups.push_back({base + ".x", ParamClass::Features,
                          {t.x.data.data(), t.x.data.size()}});
        groups.push_back({base + ".y", ParamClass::Features,
                          {t.y.data.data(), t.y.data.size()}});
        groups.push_back({base + ".z", ParamClass::Features,
                          {t.z.data.data(), t.z.data.size()}});
    }
}

}  // namespace

void AvatarModel::refresh_canonical_cache() {
    canonical_vertices = eval_rig(rig, Eigen::VectorXd::Zero(rig.blendshape_count()),
                                  UnitQuaternion::identity());
    canonical_frames.resize(rig.face_count());
    for (int f = 0; f < rig.face_count(); ++f) {
        const auto& tri = rig.faces[f];
        canonical_frames[f] = triangle_frame(canonical_vertices[tri[0]],
                                             canonical_vertices[tri[1]],
                                             canonical_vertices[tri[2]]);
    }
}

void AvatarModel::validate() const {
    splats.validate(rig.face_count());
    if (static_cast<int>(canonical_frames.size()) != rig.face_count()) {
        throw ConfigInvalid("canonical cache out of date");
    }
    const int color_in = triplane.feature_dim() + posenc.output_dim();
    if (color_mlp.input_dim() != color_in) {
        throw DimensionMismatch("color decoder input does not chain");
    }
    if (color_mlp.output_dim() != 3) {
        throw DimensionMismatch("color decoder must output rgb");
    }
    if (lines_enabled()) {
        lines.validate();
        if (opacity_mlp.input_dim() != 2 * lines.expression.front().feature_dim()) {
            throw DimensionMismatch("opacity decoder input does not chain");
        }
        const int expect_out = offset_mode == OffsetMode::Opacity ? 1 : 10;
        if (opacity_mlp.output_dim() != expect_out) {
            throw DimensionMismatch("opacity decoder output dim");
        }
    }
    for (double v : splats.alpha_logit) {
        if (!std::isfinite(v)) throw ConfigInvalid("non-finite splat attribute");
    }
}

AvatarModel build_model(const SyntheticRig& rig, const Config& cfg,
                        std::span<const UnitQuaternion> jaw_samples,
                        std::uint64_t seed) {
    AvatarModel m;
    m.config = cfg;
    m.rig = rig;
    std::mt19937_64 rng(seed);

    const double grid_scale = cfg.get_double("init.grid_scale");
    const Bbox canon = rig.neutral_bounds().padded(cfg.get_double("triplane.pad"));
    m.triplane = Triplane(static_cast<int>(cfg.get_int("triplane.resolution")),
                          static_cast<int>(cfg.get_int("triplane.dim_xy")),
                          static_cast<int>(cfg.get_int("triplane.dim_side")), canon);
    m.triplane.fill_uniform(rng, grid_scale);

    m.posenc.n_freq = static_cast<int>(cfg.get_int("posenc.frequencies"));
    m.posenc.include_input = cfg.get_bool("posenc.include_input");

    const int hidden_layers = static_cast<int>(cfg.get_int("mlp.hidden_layers"));
    const int hidden_dim = static_cast<int>(cfg.get_int("mlp.hidden_dim"));
    const std::vector<int> hidden(hidden_layers, hidden_dim);

    m.color_mlp = make_mlp(m.triplane.feature_dim() + m.posenc.output_dim(), hidden, 3,
                           HeadActivation::Sigmoid, rng);

    const std::string mode = cfg.get_string("model.offset_mode");
    if (mode == "opacity") {
        m.offset_mode = OffsetMode::Opacity;
    } else if (mode == "geometry") {
        m.offset_mode = OffsetMode::Geometry;
    } else {
        throw ConfigInvalid("model.offset_mode must be opacity|geometry");
    }

    if (cfg.get_bool("lines.enabled")) {
        int n_b = static_cast<int>(cfg.get_int("lines.expressions"));
        if (n_b <= 0) n_b = rig.blendshape_count();
        n_b = std::min(n_b, rig.blendshape_count());
        const int n_j = static_cast<int>(cfg.get_int("lines.jaw_bases"));
        const int n_s = static_cast<int>(cfg.get_int("lines.resolution"));
        const int n_d2 = static_cast<int>(cfg.get_int("lines.dim"));
        const Bbox facial = rig.facial_bounds().padded(cfg.get_double("lines.pad"));

        for (int i = 0; i < n_b; ++i) {
            m.lines.expression.emplace_back(n_s, n_d2, facial);
            m.lines.expression.back().fill_uniform(rng, grid_scale);
        }
        std::vector<UnitQuaternion> samples(jaw_samples.begin(), jaw_samples.end());
        if (static_cast<int>(samples.size()) < n_j) {
            samples = fallback_jaw_samples(rig, std::max(n_j, 2));
        }
        const std::vector<int> picks = jaw_basis_fps(samples, n_j);
        for (int k : picks) {
            m.lines.jaw_basis.push_back(samples[k]);
            m.lines.jaw.emplace_back(n_s, n_d2, facial);
            m.lines.jaw.back().fill_uniform(rng, grid_scale);
        }
        const int offset_out = m.offset_mode == OffsetMode::Opacity ? 1 : 10;
        m.opacity_mlp =
            make_mlp(2 * 3 * n_d2, hidden, offset_out, HeadActivation::Tanh, rng);
    }

    m.splats = bind_splats(rig, static_cast<int>(cfg.get_int("model.splats_per_face")),
                           cfg.get_double("model.splat_init_scale"));
    m.refresh_canonical_cache();
    m.validate();
    return m;
}

void SplatGrads::resize_zero(int n) {
    mu_local.assign(static_cast<size_t>(n) * 3, 0.0);
    quat_raw.assign(static_cast<size_t>(n) * 4, 0.0);
    log_scale.assign(static_cast<size_t>(n) * 3, 0.0);
    alpha_logit.assign(static_cast<size_t>(n), 0.0);
}

void ModelGrads::set_zero() {
    std::fill(splats.mu_local.begin(), splats.mu_local.end(), 0.0);
    std::fill(splats.quat_raw.begin(), splats.quat_raw.end(), 0.0);
    std::fill(splats.log_scale.begin(), splats.log_scale.end(), 0.0);
    std::fill(splats.alpha_logit.begin(), splats.alpha_logit.end(), 0.0);
    triplane.set_zero();
    for (auto& t : expr_lines) t.set_zero();
    for (auto& t : jaw_lines) t.set_zero();
    color_mlp.set_zero();
    opacity_mlp.set_zero();
}

ModelGrads make_grads(const AvatarModel& model) {
    ModelGrads g;
    g.splats.resize_zero(model.splats.count());
    g.triplane = model.triplane;
    g.triplane.set_zero();
    for (const auto& t : model.lines.expression) {
        g.expr_lines.emplace_back(t.resolution(), t.channels(), t.bounds);
    }
    for (const auto& t : model.lines.jaw) {
        g.jaw_lines.emplace_back(t.resolution(), t.channels(), t.bounds);
    }
    g.color_mlp = model.color_mlp;
    g.color_mlp.set_zero();
    g.opacity_mlp = model.opacity_mlp;
    g.opacity_mlp.set_zero();
    return g;
}

std::vector<ParamGroup> parameter_groups(AvatarModel& m) {
    std::vector<ParamGroup> groups;
    auto& s = m.splats;
    groups.push_back({"splats.mu", ParamClass::Geometry, {s.mu_local.data(), s.mu_local.size()}});
    groups.push_back({"splats.quat", ParamClass::Geometry, {s.quat_raw.data(), s.quat_raw.size()}});
    groups.push_back({"splats.log_scale", ParamClass::Geometry, {s.log_scale.data(), s.log_scale.size()}});
    groups.push_back({"splats.alpha", ParamClass::Geometry, {s.alpha_logit.data(), s.alpha_logit.size()}});
    groups.push_back({"triplane.xy", ParamClass::Features, {m.triplane.xy.data.data(), m.triplane.xy.data.size()}});
    groups.push_back({"triplane.xz", ParamClass::Features, {m.triplane.xz.data.data(), m.triplane.xz.data.size()}});
    groups.push_back({"triplane.yz", ParamClass::Features, {m.triplane.yz.data.data(), m.triplane.yz.data.size()}});
    append_triple_groups(groups, m.lines.expression, "lines.expr.");
    append_triple_groups(groups, m.lines.jaw, "lines.jaw.");
    append_mlp_groups(groups, m.color_mlp, "mlp.color");
    append_mlp_groups(groups, m.opacity_mlp, "mlp.opacity");
    return groups;
}

std::vector<ParamGroup> gradient_groups(ModelGrads& g) {
    std::vector<ParamGroup> groups;
    auto& s = g.splats;
    groups.push_back({"splats.mu", ParamClass::Geometry, {s.mu_local.data(), s.mu_local.size()}});
    groups.push_back({"splats.quat", ParamClass::Geometry, {s.quat_raw.data(), s.quat_raw.size()}});
    groups.push_back({"splats.log_scale", ParamClass::Geometry, {s.log_scale.data(), s.log_scale.size()}});
    groups.push_back({"splats.alpha", ParamClass::Geometry, {s.alpha_logit.data(), s.alpha_logit.size()}});
    groups.push_back({"triplane.xy", ParamClass::Features, {g.triplane.xy.data.data(), g.triplane.xy.data.size()}});
    groups.push_back({"triplane.xz", ParamClass::Features, {g.triplane.xz.data.data(), g.triplane.xz.data.size()}});
    groups.push_back({"triplane.yz", ParamClass::Features, {g.triplane.yz.data.data(), g.triplane.yz.data.size()}});
    append_triple_groups(groups, g.expr_lines, "lines.expr.");
    append_triple_groups(groups, g.jaw_lines, "lines.jaw.");
    append_mlp_groups(groups, g.color_mlp, "mlp.color");
    append_mlp_groups(groups, g.opacity_mlp, "mlp.opacity");
    return groups;
}

}  // namespace ctav
