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
#include "ctav/avatar.hpp"

#include <cmath>

#include "ctav/model.hpp"

namespace ctav {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Scales mapping tanh outputs of the geometry-offset head onto the local
// splat attributes: [d_mu'(3), d_quat(4), d_log_scale(3)].
constexpr double kGeoPosScale = 0.5;
constexpr double kGeoQuatScale = 0.2;
constexpr double kGeoLogScaleScale = 0.5;

}  // namespace

void SplatSet::resize(int n) {
    mu_local.assign(static_cast<size_t>(n) * 3, 0.0);
    quat_raw.assign(static_cast<size_t>(n) * 4, 0.0);
    log_scale.assign(static_cast<size_t>(n) * 3, 0.0);
    alpha_logit.assign(static_cast<size_t>(n), 0.0);
    face_id.assign(static_cast<size_t>(n), 0);
    for (int i = 0; i < n; ++i) quat_raw[4 * i] = 1.0;
}

void SplatSet::renormalize_quats() {
    for (int i = 0; i < count(); ++i) {
        double* q = &quat_raw[4 * i];
        const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
        if (n > 0.0) {
            q[0] /= n;
            q[1] /= n;
            q[2] /= n;
            q[3] /= n;
        }
    }
}

void SplatSet::validate(int face_count) const {
    for (int f : face_id) {
        if (f < 0 || f >= face_count) {
            throw InvalidTriangleId("splat bound to face " + std::to_string(f));
        }
    }
}

SplatSet bind_splats(const SyntheticRig& rig, int per_face, double init_scale) {
    if (per_face < 1) throw ConfigInvalid("splats per face must be >= 1");
    if (!(init_scale > 0.0)) throw ConfigInvalid("splat init scale must be positive");
    SplatSet s;
    s.resize(rig.face_count() * per_face);
    const double ls = std::log(init_scale);
    for (int f = 0; f < rig.face_count(); ++f) {
        for (int j = 0; j < per_face; ++j) {
            const int i = f * per_face + j;
            s.face_id[i] = f;
            s.log_scale[3 * i] = ls;
            s.log_scale[3 * i + 1] = ls;
            s.log_scale[3 * i + 2] = ls;
            // mu' = 0, identity quaternion, alpha logit 0 from resize().
        }
    }
    return s;
}

void FrameAttributes::resize(int n) {
    mu.assign(n, Vec3::Zero());
    rot.assign(n, Mat3::Identity());
    scale.assign(n, Vec3::Ones());
    rgb.assign(n, Vec3::Zero());
    alpha.assign(n, 0.0);
}

void FrameGrads::resize_zero(int n) {
    mu.assign(n, Vec3::Zero());
    rot.assign(n, Mat3::Zero());
    scale.assign(n, Vec3::Zero());
    rgb.assign(n, Vec3::Zero());
    alpha.assign(n, 0.0);
    delta_alpha_direct.assign(n, 0.0);
}

FrameAttributes assemble(const AvatarModel& model, const ExpressionInput& expr,
                         const RigPose& pose, const Camera& cam, AssembleCache* cache,
                         const AssembleOptions& opts) {
    std::vector<Vec3> verts = eval_rig(model.rig, expr.beta, expr.jaw);
    if (!pose.is_identity()) {
        for (Vec3& v : verts) v = pose.rotation * v + pose.translation;
    }
    return assemble_with_vertices(model, expr, verts, cam, cache, opts);
}

FrameAttributes assemble_with_vertices(const AvatarModel& model,
                                       const ExpressionInput& expr,
                                       const std::vector<Vec3>& verts,
                                       const Camera& cam, AssembleCache* cache,
                                       const AssembleOptions& opts) {
    cam.validate();
    const SyntheticRig& rig = model.rig;
    const int F = rig.face_count();
    const int N = model.splats.count();
    if (static_cast<int>(verts.size()) != rig.vertex_count()) {
        throw TopologyMismatch("deformed vertex count");
    }
    if (static_cast<int>(model.canonical_frames.size()) != F) {
        throw ConfigInvalid("canonical cache out of date");
    }

    AssembleCache local;
    AssembleCache& c = cache ? *cache : local;
    c.n = N;

    // Deformed triangle frames and their displacement from neutral.
    c.deformed_frames.resize(F);
    c.face_translation.resize(F);
    parallel_chunks(opts.pool, F, [&](int, std::int64_t f0, std::int64_t f1) {
        for (std::int64_t f = f0; f < f1; ++f) {
            const auto& tri = rig.faces[f];
            c.deformed_frames[f] = triangle_frame(verts[tri[0]], verts[tri[1]], verts[tri[2]]);
            c.face_translation[f] = c.deformed_frames[f].T - model.canonical_frames[f].T;
        }
    });

    const bool lines_on = model.lines_enabled();
    c.lines_active = lines_on;

    // Canonical sampling positions and the facial-bounds cull.
    c.canonical_pos.resize(N);
    c.in_line_bounds.assign(N, 0);
    const Bbox* line_bb = lines_on ? &model.lines.bounds() : nullptr;
    parallel_chunks(opts.pool, N, [&](int, std::int64_t i0, std::int64_t i1) {
        for (std::int64_t i = i0; i < i1; ++i) {
            const int f = model.splats.face_id[i];
            if (f < 0 || f >= F) throw InvalidTriangleId("face " + std::to_string(f));
            const TriangleFrame& fc = model.canonical_frames[f];
            const Vec3 p = fc.k * (fc.R * model.splats.mu(i)) + fc.T;
            c.canonical_pos[i] = p;
            if (lines_on && (!opts.cull_lines || line_bb->contains(p))) {
                c.in_line_bounds[i] = 1;
            }
        }
    });

    // Per-frame line mixing, then batched offset decoding for surviving rows.
    c.line_rows.clear();
    c.delta_alpha.assign(N, 0.0);
    if (lines_on) {
        const int n_b = model.line_expression_count();
        c.expr_weights = expr.leading(n_b);
        c.mixed_expr = mix_expression_lines(model.lines, c.expr_weights);
        c.jaw_mix_weights = jaw_weights(expr.jaw, model.lines);
        c.mixed_jaw = mix_jaw_lines(model.lines, expr.jaw);
        for (int i = 0; i < N; ++i) {
            if (c.in_line_bounds[i]) c.line_rows.push_back(i);
        }
        const int rows = static_cast<int>(c.line_rows.size());
        const int fd = c.mixed_expr.feature_dim();
        c.line_in.resize(rows, 2 * fd);
        parallel_chunks(opts.pool, rows, [&](int, std::int64_t r0, std::int64_t r1) {
            for (std::int64_t r = r0; r < r1; ++r) {
                const Vec3& p = c.canonical_pos[c.line_rows[r]];
                line_sample(c.mixed_expr, p, {c.line_in.row(r).data(), (size_t)fd});
                line_sample(c.mixed_jaw, p, {c.line_in.row(r).data() + fd, (size_t)fd});
            }
        });
        if (rows > 0) {
            c.line_out = mlp_forward_batch(model.opacity_mlp, c.line_in, &c.line_cache);
        } else {
            c.line_out.resize(0, model.opacity_mlp.output_dim());
        }
        if (model.offset_mode == OffsetMode::Opacity) {
            for (int r = 0; r < rows; ++r) c.delta_alpha[c.line_rows[r]] = c.line_out(r, 0);
        }
    }

    // Effective local attributes (geometry-offset mode adds decoded offsets).
    const bool geo = lines_on && model.offset_mode == OffsetMode::Geometry;
    if (geo) {
        c.eff_mu_local = model.splats.mu_local;
        c.eff_quat_raw = model.splats.quat_raw;
        c.eff_log_scale = model.splats.log_scale;
        for (size_t r = 0; r < c.line_rows.size(); ++r) {
            const int i = c.line_rows[r];
            for (int a = 0; a < 3; ++a) {
                c.eff_mu_local[3 * i + a] += kGeoPosScale * c.line_out(r, a);
            }
            for (int a = 0; a < 4; ++a) {
                c.eff_quat_raw[4 * i + a] += kGeoQuatScale * c.line_out(r, 3 + a);
            }
            for (int a = 0; a < 3; ++a) {
                c.eff_log_scale[3 * i + a] += kGeoLogScaleScale * c.line_out(r, 7 + a);
            }
        }
    }
    const double* mu_loc = geo ? c.eff_mu_local.data() : model.splats.mu_local.data();
    const double* q_raw = geo ? c.eff_quat_raw.data() : model.splats.quat_raw.data();
    const double* ls = geo ? c.eff_log_scale.data() : model.splats.log_scale.data();

    FrameAttributes attrs;
    attrs.resize(N);

    // Deformed placement, view canonicalization, and the color-decoder input.
    const int feat = model.triplane.feature_dim();
    const int enc = model.posenc.output_dim();
    c.color_in.resize(N, feat + enc);
    c.view_deformed.resize(N);
    c.view_raw_norm.resize(N);
    c.view_canonical.resize(N);
    const Vec3 cam_center = cam.center();
    parallel_chunks(opts.pool, N, [&](int, std::int64_t i0, std::int64_t i1) {
        for (std::int64_t i = i0; i < i1; ++i) {
            const int f = model.splats.face_id[i];
            const TriangleFrame& fd = c.deformed_frames[f];
            const TriangleFrame& fc = model.canonical_frames[f];

            const Vec3 mu_l(mu_loc[3 * i], mu_loc[3 * i + 1], mu_loc[3 * i + 2]);
            const Mat3 r_l = quat_to_rotmat(q_raw[4 * i], q_raw[4 * i + 1],
                                            q_raw[4 * i + 2], q_raw[4 * i + 3]);
            const Vec3 s_l(std::exp(ls[3 * i]), std::exp(ls[3 * i + 1]),
                           std::exp(ls[3 * i + 2]));
            const SplatTransform g = local_to_global(mu_l, r_l, s_l, fd);
            attrs.mu[i] = g.mu;
            attrs.rot[i] = g.rot;
            attrs.scale[i] = g.scale;

            const Vec3 v_raw = g.mu - cam_center;
            const double n = v_raw.norm();
            c.view_raw_norm[i] = n;
            const Vec3 v_d = v_raw / n;
            c.view_deformed[i] = v_d;
            const Vec3 v_c = canonicalize_view(v_d, fc.R, fd.R);
            c.view_canonical[i] = v_c;

            triplane_sample(model.triplane, c.canonical_pos[i],
                            {c.color_in.row(i).data(), (size_t)feat});
            const Eigen::VectorXd pe = posenc(v_c, model.posenc);
            for (int k = 0; k < enc; ++k) c.color_in(i, feat + k) = pe[k];
        }
    });

    const Eigen::MatrixXd rgb = mlp_forward_batch(model.color_mlp, c.color_in, &c.color_cache);

    c.alpha_preclamp.resize(N);
    for (int i = 0; i < N; ++i) {
        attrs.rgb[i] = Vec3(rgb(i, 0), rgb(i, 1), rgb(i, 2));
        const double pre = sigmoid(model.splats.alpha_logit[i]) + c.delta_alpha[i];
        c.alpha_preclamp[i] = pre;
        attrs.alpha[i] = std::clamp(pre, 0.0, 1.0);
    }
    return attrs;
}

void assemble_backward(const AvatarModel& model, const ExpressionInput& expr,
                       const AssembleCache& c, const FrameGrads& upstream,
                       ModelGrads& grads, const AssembleOptions& opts) {
    const int N = c.n;
    const bool lines_on = c.lines_active;
    const bool geo = lines_on && model.offset_mode == OffsetMode::Geometry;
    const double* q_raw = geo ? c.eff_quat_raw.data() : model.splats.quat_raw.data();
    const double* ls = geo ? c.eff_log_scale.data() : model.splats.log_scale.data();

    // Opacity composition: alpha = clamp(sigmoid(logit) + dAlpha, 0, 1).
    std::vector<double> d_delta_alpha(N, 0.0);
    for (int i = 0; i < N; ++i) {
        const double pre = c.alpha_preclamp[i];
        const double d_pre = (pre > 0.0 && pre < 1.0) ? upstream.alpha[i] : 0.0;
        const double s = sigmoid(model.splats.alpha_logit[i]);
        grads.splats.alpha_logit[i] += d_pre * s * (1.0 - s);
        if (lines_on && c.in_line_bounds[i]) {
            d_delta_alpha[i] = d_pre + upstream.delta_alpha_direct[i];
        }
    }

    // Color decoder. dX splits into the triplane feature part and the view
    // encoding part.
    const int feat = model.triplane.feature_dim();
    const int enc = model.posenc.output_dim();
    Eigen::MatrixXd d_rgb(N, 3);
    for (int i = 0; i < N; ++i) {
        d_rgb(i, 0) = upstream.rgb[i].x();
        d_rgb(i, 1) = upstream.rgb[i].y();
        d_rgb(i, 2) = upstream.rgb[i].z();
    }
    const Eigen::MatrixXd d_color_in =
        mlp_backward_batch(model.color_mlp, c.color_cache, d_rgb, grads.color_mlp);

    std::vector<Vec3> d_mu_world(N);    // total gradient on the deformed position
    std::vector<Vec3> d_p(N, Vec3::Zero());  // gradient on the canonical position
    for (int i = 0; i < N; ++i) d_mu_world[i] = upstream.mu[i];

    for (int i = 0; i < N; ++i) {
        // Triplane features.
        Eigen::VectorXd up = d_color_in.row(i).head(feat).transpose();
        triplane_sample_backward(model.triplane, c.canonical_pos[i],
                                 {up.data(), (size_t)feat}, grads.triplane, d_p[i]);
        // View-direction chain: posenc -> v_c -> v_d -> mu.
        Vec3 d_vc = Vec3::Zero();
        const Eigen::VectorXd d_pe = d_color_in.row(i).tail(enc).transpose();
        posenc_backward(c.view_canonical[i], model.posenc, d_pe, d_vc);
        const int f = model.splats.face_id[i];
        const Mat3& Rc = model.canonical_frames[f].R;
        const Mat3& Rd = c.deformed_frames[f].R;
        const Vec3 d_vd = Rd * (Rc.transpose() * d_vc);
        const Vec3& vd = c.view_deformed[i];
        d_mu_world[i] += (d_vd - vd * vd.dot(d_vd)) / c.view_raw_norm[i];
    }

    // Geometry chain: world-space grads to (effective) local attributes.
    std::vector<double> d_eff_mu(static_cast<size_t>(N) * 3, 0.0);
    std::vector<double> d_eff_quat(static_cast<size_t>(N) * 4, 0.0);
    std::vector<double> d_eff_ls(static_cast<size_t>(N) * 3, 0.0);
    for (int i = 0; i < N; ++i) {
        const int f = model.splats.face_id[i];
        const TriangleFrame& fd = c.deformed_frames[f];

        // s_global = k * exp(ls): d_ls = d_s * s_global.
        for (int a = 0; a < 3; ++a) {
            const double s_glob = fd.k * std::exp(ls[3 * i + a]);
            d_eff_ls[3 * i + a] = upstream.scale[i][a] * s_glob;
        }
        // r = R_d r_local.
        const Mat3 d_rot_local = fd.R.transpose() * upstream.rot[i];
        quat_to_rotmat_backward(&q_raw[4 * i], d_rot_local, &d_eff_quat[4 * i]);
        // mu = k R_d mu' + T.
        const Vec3 dm = fd.k * (fd.R.transpose() * d_mu_world[i]);
        d_eff_mu[3 * i] = dm.x();
        d_eff_mu[3 * i + 1] = dm.y();
        d_eff_mu[3 * i + 2] = dm.z();
    }

    // Offsets: effective = base (+ scaled decoder outputs in geometry mode).
    Eigen::MatrixXd d_line_out;
    if (lines_on) {
        d_line_out.setZero(static_cast<int>(c.line_rows.size()),
                           model.opacity_mlp.output_dim());
    }
    for (int i = 0; i < N; ++i) {
        for (int a = 0; a < 3; ++a) grads.splats.mu_local[3 * i + a] += d_eff_mu[3 * i + a];
        for (int a = 0; a < 4; ++a) grads.splats.quat_raw[4 * i + a] += d_eff_quat[4 * i + a];
        for (int a = 0; a < 3; ++a) grads.splats.log_scale[3 * i + a] += d_eff_ls[3 * i + a];
    }
    if (lines_on) {
        if (model.offset_mode == OffsetMode::Opacity) {
            for (size_t r = 0; r < c.line_rows.size(); ++r) {
                d_line_out(static_cast<int>(r), 0) = d_delta_alpha[c.line_rows[r]];
            }
        } else {
            for (size_t r = 0; r < c.line_rows.size(); ++r) {
                const int i = c.line_rows[r];
                for (int a = 0; a < 3; ++a) {
                    d_line_out(r, a) = kGeoPosScale * d_eff_mu[3 * i + a];
                }
                for (int a = 0; a < 4; ++a) {
                    d_line_out(r, 3 + a) = kGeoQuatScale * d_eff_quat[4 * i + a];
                }
                for (int a = 0; a < 3; ++a) {
                    d_line_out(r, 7 + a) = kGeoLogScaleScale * d_eff_ls[3 * i + a];
                }
            }
        }

        if (!c.line_rows.empty()) {
            FeatureLineTriple d_mixed_expr(c.mixed_expr.resolution(),
                                           c.mixed_expr.channels(), c.mixed_expr.bounds);
            FeatureLineTriple d_mixed_jaw(c.mixed_jaw.resolution(),
                                          c.mixed_jaw.channels(), c.mixed_jaw.bounds);
            const Eigen::MatrixXd d_line_in = mlp_backward_batch(
                model.opacity_mlp, c.line_cache, d_line_out, grads.opacity_mlp);
            const int fd = c.mixed_expr.feature_dim();
            for (size_t r = 0; r < c.line_rows.size(); ++r) {
                const int i = c.line_rows[r];
                const Eigen::VectorXd row = d_line_in.row(static_cast<int>(r)).transpose();
                line_sample_backward(c.mixed_expr, c.canonical_pos[i],
                                     {row.data(), (size_t)fd}, d_mixed_expr, d_p[i]);
                line_sample_backward(c.mixed_jaw, c.canonical_pos[i],
                                     {row.data() + fd, (size_t)fd}, d_mixed_jaw, d_p[i]);
            }
            accumulate_mix_backward(grads.expr_lines, c.expr_weights, d_mixed_expr);
            accumulate_mix_backward(grads.jaw_lines, c.jaw_mix_weights, d_mixed_jaw);
        }
    }

    // Canonical sampling position p = k_c R_c mu' + T_c (base mu' always).
    for (int i = 0; i < N; ++i) {
        const int f = model.splats.face_id[i];
        const TriangleFrame& fc = model.canonical_frames[f];
        const Vec3 dm = fc.k * (fc.R.transpose() * d_p[i]);
        grads.splats.mu_local[3 * i] += dm.x();
        grads.splats.mu_local[3 * i + 1] += dm.y();
        grads.splats.mu_local[3 * i + 2] += dm.z();
    }
    (void)expr;
    (void)opts;
}

}  // namespace ctav
