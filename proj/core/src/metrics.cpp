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
#include "ctav/metrics.hpp"

#include <cmath>

#include "ctav/losses.hpp"
#include "ctav/raster.hpp"

namespace ctav {

double psnr(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height) {
        throw DimensionMismatch("psnr image sizes");
    }
    double mse = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.data.size());
    if (mse <= 0.0) return 99.0;
    return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

EvalSummary eval_metrics(const AvatarModel& model, const Dataset& ds, EvalSplit split,
                         ThreadPool* pool) {
    std::vector<int> frames;
    for (int f = 0; f < ds.frame_count(); ++f) {
        const DatasetFrame& fr = ds.frames[f];
        const bool take = split == EvalSplit::All ||
                          (split == EvalSplit::Train && !fr.holdout) ||
                          (split == EvalSplit::Holdout && fr.holdout) ||
                          (split == EvalSplit::HoldoutLarge && fr.holdout && fr.large) ||
                          (split == EvalSplit::HoldoutSmall && fr.holdout && !fr.large);
        if (take) frames.push_back(f);
    }
    if (frames.empty() || ds.camera_count() == 0) {
        throw EmptySplit("no frames in the requested split");
    }

    EvalSummary out;
    AssembleCache cache;
    for (int f : frames) {
        const std::vector<Vec3> verts =
            eval_rig(ds.rig, ds.frames[f].beta, ds.frames[f].jaw);
        for (int c = 0; c < ds.camera_count(); ++c) {
            const Camera& cam = ds.cameras[c];
            const FrameAttributes attrs = assemble_with_vertices(
                model, ds.expression(f), verts, cam, &cache, {true, pool});
            const auto projected = project(attrs, cam);
            const Image img =
                blend(projected, cam.width, cam.height, ds.background, nullptr, pool);
            EvalRow row;
            row.frame = f;
            row.cam = c;
            row.psnr = psnr(img, ds.image(f, c));
            row.ssim = ssim(img, ds.image(f, c));
            out.mean_psnr += row.psnr;
            out.mean_ssim += row.ssim;
            out.rows.push_back(row);
        }
    }
    out.mean_psnr /= static_cast<double>(out.rows.size());
    out.mean_ssim /= static_cast<double>(out.rows.size());
    return out;
}

}  // namespace ctav
