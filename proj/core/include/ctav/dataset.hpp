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

#include <string>
#include <vector>

#include "ctav/blendmix.hpp"
#include "ctav/image.hpp"
#include "ctav/parallel.hpp"
#include "ctav/synthrig.hpp"

namespace ctav {

/// One animation frame of the capture: coefficients plus per-camera targets.
struct DatasetFrame {
    Eigen::VectorXd beta;
    UnitQuaternion jaw;
    bool large = false;    // drawn from the large-motion tail
    bool holdout = false;  // excluded from training
};

struct Dataset {
    SyntheticRig rig;
    std::vector<Camera> cameras;
    std::vector<DatasetFrame> frames;
    std::vector<Image> images;  // frame-major: images[frame * n_cameras + cam]
    Vec3 background = Vec3::Zero();
    int width = 0, height = 0;
    std::uint64_t seed = 0;

    int frame_count() const { return static_cast<int>(frames.size()); }
    int camera_count() const { return static_cast<int>(cameras.size()); }
    const Image& image(int frame, int cam) const {
        return images[static_cast<size_t>(frame) * cameras.size() + cam];
    }
    std::vector<int> train_frames() const;
    std::vector<int> holdout_frames() const;
    ExpressionInput expression(int frame) const;
};

struct DatasetConfig {
    int n_frames = 200;
    int n_cameras = 4;
    int image_size = 64;
    int holdout_count = 20;  // trailing frames, alternating small/large
    double small_motion_fraction = 0.8;
};

/// Renders ground truth from a hidden oracle avatar whose wrinkle-like
/// opacity patterns respond to the expression coefficients. Deterministic
/// per seed; the expression distribution is skewed toward small motions.
Dataset generate_dataset(const SyntheticRig& rig, const DatasetConfig& cfg,
                         std::uint64_t seed, ThreadPool* pool = nullptr);

/// Directory layout: meta.txt (key=value schema) plus one CTIM image per
/// frame-camera pair under images/.
void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

/// Canonical-space center of the brow wrinkle zone (tests project it).
Vec3 dataset_wrinkle_zone_center(const SyntheticRig& rig);

}  // namespace ctav
