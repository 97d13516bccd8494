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

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ctav/geometry.hpp"

namespace ctav {

/// Weighted squared vertex-displacement distance between frame meshes:
/// dist(i, j) = sum_v w_v |M_i[v] - M_j[v]|^2, w_v = 2 for eye vertices and 1
/// otherwise. Symmetric with zero diagonal. Throws TopologyMismatch when the
/// meshes disagree in size.
Eigen::MatrixXd frame_distance_matrix(const std::vector<std::vector<Vec3>>& meshes,
                                      std::span<const int> eye_vertex_ids);

struct FrameCluster {
    std::vector<int> assignment;  // cluster id per frame
    int n_clusters = 0;

    std::vector<std::vector<int>> members() const;
};

/// Spectral clustering of a distance matrix: affinity exp(-dist / sigma^2)
/// with sigma^2 the median off-diagonal distance, symmetric-normalized
/// Laplacian, the n smallest eigenvectors row-normalized, then k-means with
/// k-means++ seeding (at most 100 Lloyd iterations). Deterministic per seed.
/// Throws TooFewFrames when the matrix has fewer than n rows.
FrameCluster spectral_cluster(const Eigen::MatrixXd& dist, int n, std::uint64_t seed);

/// Infinite frame stream: each draw picks a cluster uniformly, then a frame
/// uniformly inside it. Throws EmptyCluster on construction if any cluster
/// has no members.
class BalancedSampler {
public:
    BalancedSampler(const FrameCluster& clusters, std::uint64_t seed);
    int next();

private:
    std::vector<std::vector<int>> members_;
    std::mt19937_64 rng_;
};

}  // namespace ctav
