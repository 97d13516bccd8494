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

#include "ctav/dataset.hpp"
#include "ctav/model.hpp"

namespace ctav {

/// PSNR on [0,1] images: 10 log10(1 / MSE), capped at 99 dB (the perfect
/// match sentinel).
double psnr(const Image& a, const Image& b);

enum class EvalSplit : std::uint8_t {
    All = 0,
    Train = 1,
    Holdout = 2,
    HoldoutLarge = 3,
    HoldoutSmall = 4,
};

struct EvalRow {
    int frame = 0;
    int cam = 0;
    double psnr = 0.0;
    double ssim = 0.0;
};

struct EvalSummary {
    std::vector<EvalRow> rows;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
};

/// Renders every (frame, camera) pair of the split and scores it against the
/// dataset target. Throws EmptySplit when the split selects nothing.
EvalSummary eval_metrics(const AvatarModel& model, const Dataset& ds, EvalSplit split,
                         ThreadPool* pool = nullptr);

}  // namespace ctav
