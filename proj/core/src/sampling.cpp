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
#include "ctav/sampling.hpp"

#include <algorithm>
#include <limits>

#include "ctav/errors.hpp"

namespace ctav {

namespace {

// Deterministic k-means with k-means++ seeding; rows of X are points.
std::vector<int> kmeans(const Eigen::MatrixXd& X, int k, std::mt19937_64& rng,
                        int max_iters = 100) {
    const int n = static_cast<int>(X.rows());
    std::vector<Eigen::VectorXd> centers;
    centers.reserve(k);

    std::uniform_int_distribution<int> first(0, n - 1);
    centers.push_back(X.row(first(rng)).transpose());
    std::vector<double> d2(n);
    while (static_cast<int>(centers.size()) < k) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (const auto& c : centers) {
                best = std::min(best, (X.row(i).transpose() - c).squaredNorm());
            }
            d2[i] = best;
            sum += best;
        }
        int pick = 0;
        if (sum > 0.0) {
            std::uniform_real_distribution<double> u(0.0, sum);
            double r = u(rng);
            for (int i = 0; i < n; ++i) {
                r -= d2[i];
                if (r <= 0.0) {
                    pick = i;
                    break;
                }
                pick = i;
            }
        } else {
            // All points coincide with some center; spread deterministically.
            pick = static_cast<int>(centers.size()) % n;
        }
        centers.push_back(X.row(pick).transpose());
    }

    std::vector<int> assign(n, 0);
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::max();
            for (int c = 0; c < k; ++c) {
                const double d = (X.row(i).transpose() - centers[c]).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        std::vector<int> count(k, 0);
        std::vector<Eigen::VectorXd> sum(k, Eigen::VectorXd::Zero(X.cols()));
        for (int i = 0; i < n; ++i) {
            sum[assign[i]] += X.row(i).transpose();
            ++count[assign[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (count[c] > 0) {
                centers[c] = sum[c] / count[c];
            } else {
                // Reseed an empty cluster with the point farthest from its
                // center (deterministic, lowest index on ties).
                int far = 0;
                double fd = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double d =
                        (X.row(i).transpose() - centers[assign[i]]).squaredNorm();
                    if (d > fd) {
                        fd = d;
                        far = i;
                    }
                }
                centers[c] = X.row(far).transpose();
                assign[far] = c;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
    }
    return assign;
}

}  // namespace

Eigen::MatrixXd frame_distance_matrix(const std::vector<std::vector<Vec3>>& meshes,
                                      std::span<const int> eye_vertex_ids) {
    const int n = static_cast<int>(meshes.size());
    if (n == 0) return {};
    const size_t V = meshes.front().size();
    for (const auto& m : meshes) {
        if (m.size() != V) throw TopologyMismatch("meshes must share vertex count");
    }
    std::vector<double> w(V, 1.0);
    for (int id : eye_vertex_ids) {
        if (id < 0 || static_cast<size_t>(id) >= V) {
            throw TopologyMismatch("eye vertex id out of range");
        }
        w[id] = 2.0;
    }
    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double d = 0.0;
            for (size_t v = 0; v < V; ++v) {
                d += w[v] * (meshes[i][v] - meshes[j][v]).squaredNorm();
            }
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }
    return dist;
}

std::vector<std::vector<int>> FrameCluster::members() const {
    std::vector<std::vector<int>> m(n_clusters);
    for (size_t i = 0; i < assignment.size(); ++i) {
        m[assignment[i]].push_back(static_cast<int>(i));
    }
    return m;
}

FrameCluster spectral_cluster(const Eigen::MatrixXd& dist, int n, std::uint64_t seed) {
    const int frames = static_cast<int>(dist.rows());
    if (frames < n || n < 1) throw TooFewFrames("need at least n frames to cluster");
    if (dist.cols() != frames) throw DimensionMismatch("distance matrix not square");

    // Median off-diagonal distance as the kernel bandwidth.
    std::vector<double> offdiag;
    offdiag.reserve(static_cast<size_t>(frames) * (frames - 1) / 2);
    for (int i = 0; i < frames; ++i) {
        for (int j = i + 1; j < frames; ++j) offdiag.push_back(dist(i, j));
    }
    double sigma2 = 0.0;
    if (!offdiag.empty()) {
        std::nth_element(offdiag.begin(), offdiag.begin() + offdiag.size() / 2,
                         offdiag.end());
        sigma2 = offdiag[offdiag.size() / 2];
        if (sigma2 <= 0.0) {
            double mean = 0.0;
            for (double d : offdiag) mean += d;
            sigma2 = mean / offdiag.size();
        }
    }
    if (sigma2 <= 0.0) {
        if (n == 1) return FrameCluster{std::vector<int>(frames, 0), 1};
        throw ConfigInvalid("all frames identical; cannot form multiple clusters");
    }

    Eigen::MatrixXd affinity = (-dist / sigma2).array().exp();
    Eigen::VectorXd degree = affinity.rowwise().sum();
    Eigen::VectorXd dinv = degree.array().rsqrt();
    Eigen::MatrixXd lap =
        Eigen::MatrixXd::Identity(frames, frames) -
        dinv.asDiagonal() * affinity * dinv.asDiagonal();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap);
    Eigen::MatrixXd embed = eig.eigenvectors().leftCols(n);
    for (int i = 0; i < frames; ++i) {
        const double norm = embed.row(i).norm();
        if (norm > 1e-12) embed.row(i) /= norm;
    }

    std::mt19937_64 rng(seed);
    FrameCluster out;
    out.n_clusters = n;
    out.assignment = kmeans(embed, n, rng);
    return out;
}

BalancedSampler::BalancedSampler(const FrameCluster& clusters, std::uint64_t seed)
    : members_(clusters.members()), rng_(seed) {
    if (members_.empty()) throw EmptyCluster("no clusters");
    for (const auto& m : members_) {
        if (m.empty()) throw EmptyCluster("cluster with no frames");
    }
}

int BalancedSampler::next() {
    std::uniform_int_distribution<int> pick_cluster(0, static_cast<int>(members_.size()) - 1);
    const auto& m = members_[pick_cluster(rng_)];
    std::uniform_int_distribution<int> pick_frame(0, static_cast<int>(m.size()) - 1);
    return m[pick_frame(rng_)];
}

}  // namespace ctav
