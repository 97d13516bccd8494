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
#include <vector>

#include "ctav/fields.hpp"
#include "ctav/geometry.hpp"

namespace ctav {

/// Per-blendshape and per-jaw-basis feature lines plus the jaw basis
/// rotations they are keyed by. All triples share (resolution, channels) and
/// the facial bounding box.
struct FeatureLineBank {
    std::vector<FeatureLineTriple> expression;  // n_b triples
    std::vector<FeatureLineTriple> jaw;         // n_j triples
    std::vector<UnitQuaternion> jaw_basis;      // n_j rotations

    int expression_count() const { return static_cast<int>(expression.size()); }
    int jaw_count() const { return static_cast<int>(jaw.size()); }
    bool empty() const { return expression.empty() && jaw.empty(); }
    int line_resolution() const;
    int channels() const;
    const Bbox& bounds() const;

    /// Checks shared shapes, counts, and pairwise-distinct jaw bases.
    void validate() const;
};

/// Expression coefficients plus the jaw rotation driving one frame.
struct ExpressionInput {
    Eigen::VectorXd beta;
    UnitQuaternion jaw = UnitQuaternion::identity();

    static ExpressionInput neutral(int n_b);
    /// Leading `n` coefficients (throws DimensionMismatch if beta is shorter).
    Eigen::VectorXd leading(int n) const;
};

/// Entrywise weighted sum of the bank's expression triples: requires
/// beta.size() == expression_count().
FeatureLineTriple mix_expression_lines(const FeatureLineBank& bank,
                                       const Eigen::VectorXd& beta);

/// Inverse-distance weights over jaw bases: w_k = (1 - d(q, q_k)) / sum.
/// Nonnegative, summing to 1. Throws DegenerateWeights when every basis is
/// orthogonal to q.
Eigen::VectorXd jaw_weights(const UnitQuaternion& q, const FeatureLineBank& bank);

/// Weighted sum of the jaw triples using jaw_weights(q).
FeatureLineTriple mix_jaw_lines(const FeatureLineBank& bank, const UnitQuaternion& q);

/// Greedy farthest point sampling under quat_distance. The first pick is the
/// quaternion with maximum mean distance to all others; every next pick
/// maximizes the minimum distance to the chosen set. Ties resolve to the
/// lowest index. Throws InsufficientSamples when quats.size() < n.
std::vector<int> jaw_basis_fps(std::span<const UnitQuaternion> quats, int n);

/// Reverse of a weighted triple mix: grads[i] += weights[i] * mixed_grad.
void accumulate_mix_backward(std::vector<FeatureLineTriple>& triple_grads,
                             const Eigen::VectorXd& weights,
                             const FeatureLineTriple& mixed_grad);

}  // namespace ctav
