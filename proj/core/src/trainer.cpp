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
#include "ctav/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "ctav/metrics.hpp"
#include "ctav/optimizer.hpp"
#include "ctav/sampling.hpp"

namespace ctav {

Pipeline::Pipeline(AvatarModel& model, const LossWeights& weights,
                   const Vec3& background, PipelineOptions opts)
    : model_(model), weights_(weights), background_(background), opts_(opts) {
    weights_.validate();
}

Image Pipeline::render(const ExpressionInput& expr, const std::vector<Vec3>& verts,
                       const Camera& cam) {
    const FrameAttributes attrs = assemble_with_vertices(
        model_, expr, verts, cam, &assemble_cache_, {opts_.cull_lines, opts_.pool});
    const auto projected = project(attrs, cam);
    return blend(projected, cam.width, cam.height, background_, &blend_cache_,
                 opts_.pool);
}

LossBreakdown Pipeline::loss(const ExpressionInput& expr,
                             const std::vector<Vec3>& verts, const Camera& cam,
                             const Image& target) {
    return run(expr, verts, cam, target, nullptr);
}

LossBreakdown Pipeline::forward_backward(const ExpressionInput& expr,
                                         const std::vector<Vec3>& verts,
                                         const Camera& cam, const Image& target,
                                         ModelGrads& grads) {
    return run(expr, verts, cam, target, &grads);
}

LossBreakdown Pipeline::run(const ExpressionInput& expr, const std::vector<Vec3>& verts,
                            const Camera& cam, const Image& target, ModelGrads* grads) {
    const AssembleOptions aopts{opts_.cull_lines, opts_.pool};
    const FrameAttributes attrs =
        assemble_with_vertices(model_, expr, verts, cam, &assemble_cache_, aopts);
    const auto projected = project(attrs, cam);
    const Image rendered = blend(projected, cam.width, cam.height, background_,
                                 &blend_cache_, opts_.pool);

    LossBreakdown out;
    Image image_grad;
    const ImageLossResult il =
        loss_image(rendered, target, weights_.lambda, grads ? &image_grad : nullptr);
    out.image = il.value;

    FrameGrads fg;
    if (grads) {
        grads->set_zero();
        fg.resize_zero(attrs.count());
    }
    out.op = loss_opacity_penalty(
        assemble_cache_.delta_alpha, model_.splats.face_id,
        assemble_cache_.face_translation, weights_,
        grads ? std::span<double>(fg.delta_alpha_direct) : std::span<double>{});
    const GeomLossResult gl =
        loss_geom(model_.splats, weights_, grads ? &grads->splats : nullptr);
    out.geom = gl.value;

    if (grads) {
        const RasterGrads rg =
            blend_backward(projected, blend_cache_, image_grad, background_, opts_.pool);
        project_backward(attrs, cam, projected, rg, fg, opts_.pool);
        assemble_backward(model_, expr, assemble_cache_, fg, *grads, aopts);
    }
    out.total = out.image + out.geom + out.op;
    return out;
}

LossWeights loss_weights_from_config(const Config& cfg, const SyntheticRig& rig) {
    LossWeights w;
    w.lambda = cfg.get_double("loss.lambda_dssim");
    w.lambda_pos = cfg.get_double("loss.lambda_pos");
    w.lambda_scale = cfg.get_double("loss.lambda_scale");
    w.lambda_op = cfg.get_double("loss.lambda_op");
    w.eps_pos = cfg.get_double("loss.eps_pos");
    w.eps_scale = cfg.get_double("loss.eps_scale");
    w.tau = cfg.get_double("loss.tau_fraction") * rig.neutral_bounds().diagonal();
    w.validate();
    return w;
}

double static_region_mean_abs_dalpha(AvatarModel& model, const Dataset& ds,
                                     std::span<const int> frames, ThreadPool* pool) {
    const auto static_faces = model.rig.static_face_mask();
    AssembleCache cache;
    double sum = 0.0;
    std::int64_t count = 0;
    for (int f : frames) {
        const std::vector<Vec3> verts =
            eval_rig(ds.rig, ds.frames[f].beta, ds.frames[f].jaw);
        assemble_with_vertices(model, ds.expression(f), verts, ds.cameras.front(),
                               &cache, {true, pool});
        for (int i = 0; i < model.splats.count(); ++i) {
            if (!static_faces[model.splats.face_id[i]]) continue;
            sum += std::abs(cache.delta_alpha[i]);
            ++count;
        }
    }
    return count ? sum / static_cast<double>(count) : 0.0;
}

namespace {

struct FrameSampler {
    std::vector<int> train_ids;
    std::optional<BalancedSampler> balanced;
    std::mt19937_64 rng;

    int next() {
        if (balanced) return train_ids[balanced->next()];
        std::uniform_int_distribution<int> d(0, static_cast<int>(train_ids.size()) - 1);
        return train_ids[d(rng)];
    }
};

double mean_psnr(Pipeline& pipe, const Dataset& ds,
                 const std::vector<std::vector<Vec3>>& verts,
                 std::span<const int> frames, int cameras) {
    double sum = 0.0;
    int n = 0;
    for (int f : frames) {
        for (int c = 0; c < cameras; ++c) {
            const Image img = pipe.render(ds.expression(f), verts[f], ds.cameras[c]);
            sum += psnr(img, ds.image(f, c));
            ++n;
        }
    }
    return n ? sum / n : 0.0;
}

}  // namespace

AvatarModel train(const Dataset& ds, const Config& cfg, std::ostream* metrics_log,
                  TrainResult* result) {
    const int iterations = static_cast<int>(cfg.get_int("train.iterations"));
    const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("train.seed"));
    const int eval_interval = static_cast<int>(cfg.get_int("train.eval_interval"));
    const int eval_cameras =
        std::min<int>(ds.camera_count(), std::max<int>(1, cfg.get_int("train.eval_cameras")));
    const int log_every = std::max<int>(1, cfg.get_int("train.log_every"));
    const bool balanced = cfg.get_bool("train.balanced");
    const bool penalty = cfg.get_bool("train.penalty");

    ThreadPool pool(static_cast<int>(cfg.get_int("train.threads")));

    const std::vector<int> train_ids = ds.train_frames();
    const std::vector<int> holdout_ids = ds.holdout_frames();
    if (train_ids.empty()) throw EmptySplit("no training frames");

    std::vector<UnitQuaternion> jaw_samples;
    for (int f : train_ids) jaw_samples.push_back(ds.frames[f].jaw);
    AvatarModel model = build_model(ds.rig, cfg, jaw_samples, seed);

    LossWeights weights = loss_weights_from_config(cfg, ds.rig);
    if (!penalty) weights.lambda_op = 0.0;

    // Rig evaluations are fixed per frame; cache them up front.
    std::vector<std::vector<Vec3>> verts(ds.frame_count());
    parallel_chunks(&pool, ds.frame_count(), [&](int, std::int64_t f0, std::int64_t f1) {
        for (std::int64_t f = f0; f < f1; ++f) {
            verts[f] = eval_rig(ds.rig, ds.frames[f].beta, ds.frames[f].jaw);
        }
    });

    FrameSampler sampler;
    sampler.train_ids = train_ids;
    sampler.rng.seed(seed * 0x9e3779b97f4a7c15ull + 1);
    if (balanced) {
        std::vector<std::vector<Vec3>> train_meshes;
        train_meshes.reserve(train_ids.size());
        for (int f : train_ids) train_meshes.push_back(verts[f]);
        const auto eye = ds.rig.eye_vertices();
        const Eigen::MatrixXd dist = frame_distance_matrix(train_meshes, eye);
        const int n_clusters =
            std::min<int>(static_cast<int>(cfg.get_int("sampler.clusters")),
                          static_cast<int>(train_ids.size()));
        const FrameCluster clusters = spectral_cluster(dist, n_clusters, seed);
        sampler.balanced.emplace(clusters, seed * 0x2545f4914f6cdd1dull + 7);
    }

    Pipeline pipe(model, weights, ds.background, {&pool, true});
    ModelGrads grads = make_grads(model);
    auto param_groups = parameter_groups(model);
    auto grad_groups = gradient_groups(grads);
    if (param_groups.size() != grad_groups.size()) {
        throw DimensionMismatch("parameter/gradient group mismatch");
    }
    std::vector<AdamState> states;
    states.reserve(param_groups.size());
    for (const auto& g : param_groups) states.emplace_back(g.values.size());
    const AdamConfig adam_cfg{cfg.get_double("train.adam_beta1"),
                              cfg.get_double("train.adam_beta2"),
                              cfg.get_double("train.adam_eps")};
    const double lr_features = cfg.get_double("train.lr_features");
    const double lr_mlp = cfg.get_double("train.lr_mlp");
    const double lr_geometry = cfg.get_double("train.lr_geometry");
    const auto lr_of = [&](ParamClass c) {
        switch (c) {
            case ParamClass::Features: return lr_features;
            case ParamClass::Mlp: return lr_mlp;
            case ParamClass::Geometry: return lr_geometry;
        }
        return lr_features;
    };

    std::mt19937_64 cam_rng(seed * 0xd1342543de82ef95ull + 3);
    std::uniform_int_distribution<int> cam_dist(0, ds.camera_count() - 1);

    TrainResult res;
    res.iterations = iterations;
    double first_image_loss = -1.0, last_image_loss = 0.0;

    for (int it = 1; it <= iterations; ++it) {
        const int frame = sampler.next();
        const int cam = cam_dist(cam_rng);
        const LossBreakdown lb = pipe.forward_backward(
            ds.expression(frame), verts[frame], ds.cameras[cam], ds.image(frame, cam),
            grads);
        for (size_t g = 0; g < param_groups.size(); ++g) {
            adam_step(param_groups[g].values, grad_groups[g].values, states[g],
                      lr_of(param_groups[g].cls), adam_cfg);
        }
        model.splats.renormalize_quats();

        if (first_image_loss < 0.0) first_image_loss = lb.image;
        last_image_loss = lb.image;

        std::string psnr_field;
        if (!holdout_ids.empty() && eval_interval > 0 &&
            (it % eval_interval == 0 || it == iterations)) {
            const double p = mean_psnr(pipe, ds, verts, holdout_ids, eval_cameras);
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.4f", p);
            psnr_field = buf;
        }
        if (metrics_log && (it % log_every == 0 || !psnr_field.empty() || it == iterations)) {
            (*metrics_log) << it << "," << lb.image << "," << lb.geom << "," << lb.op
                           << "," << psnr_field << "\n";
        }
    }

    res.initial_image_loss = first_image_loss;
    res.final_image_loss = last_image_loss;

    if (!holdout_ids.empty()) {
        const EvalSummary all = eval_metrics(model, ds, EvalSplit::Holdout, &pool);
        res.holdout_psnr = all.mean_psnr;
        res.holdout_ssim = all.mean_ssim;
        std::vector<int> large, small;
        for (int f : holdout_ids) {
            (ds.frames[f].large ? large : small).push_back(f);
        }
        if (!large.empty()) {
            res.holdout_large_psnr =
                eval_metrics(model, ds, EvalSplit::HoldoutLarge, &pool).mean_psnr;
        }
        if (!small.empty()) {
            res.holdout_small_psnr =
                eval_metrics(model, ds, EvalSplit::HoldoutSmall, &pool).mean_psnr;
        }
        res.static_mean_abs_dalpha =
            static_region_mean_abs_dalpha(model, ds, holdout_ids, &pool);
    }
    if (result) *result = res;
    return model;
}

std::vector<AblateArm> run_ablations(const Dataset& ds, const Config& base,
                                     const std::vector<std::string>& studies,
                                     const std::string& out_dir) {
    std::vector<AblateArm> arms;
    const auto add = [&](const std::string& name, Config cfg) {
        arms.push_back(AblateArm{name, std::move(cfg), {}});
    };
    for (const std::string& s : studies) {
        if (s == "lines") {
            Config on = base;
            Config off = base;
            off.set_bool("lines.enabled", false);
            add("lines_on", on);
            add("lines_off", off);
        } else if (s == "penalty") {
            Config on = base;
            Config off = base;
            off.set_bool("train.penalty", false);
            add("penalty_on", on);
            add("penalty_off", off);
        } else if (s == "balanced") {
            Config on = base;
            Config off = base;
            off.set_bool("train.balanced", false);
            add("balanced_on", on);
            add("balanced_off", off);
        } else if (s == "offsets") {
            Config opacity = base;
            Config geometry = base;
            geometry.set("model.offset_mode", "geometry");
            add("offset_opacity", opacity);
            add("offset_geometry", geometry);
        } else {
            throw ConfigInvalid("unknown ablation study: " + s);
        }
    }

    namespace fs = std::filesystem;
    if (!out_dir.empty()) {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) throw IoFailure("cannot create ablation output dir: " + out_dir);
    }
    for (AblateArm& arm : arms) {
        std::ofstream log;
        if (!out_dir.empty()) {
            log.open(fs::path(out_dir) / (arm.name + ".csv"));
            log << "# arm=" << arm.name << "\n";
            std::istringstream cfg_lines(arm.cfg.dump());
            std::string line;
            while (std::getline(cfg_lines, line)) log << "# " << line << "\n";
            log << "# columns=iter,L_image,L_geom,L_op,psnr_holdout\n";
        }
        train(ds, arm.cfg, out_dir.empty() ? nullptr : &log, &arm.result);
    }
    return arms;
}

}  // namespace ctav
