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
#include "ctav/blendmix.hpp"

#include <algorithm>
#include <limits>

namespace ctav {

namespace {

void axpy_line(LineGrid& dst, double a, const LineGrid& src) {
    for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += a * src.data[i];
}

void axpy_triple(FeatureLineTriple& dst, double a, const FeatureLineTriple& src) {
    axpy_line(dst.x, a, src.x);
    axpy_line(dst.y, a, src.y);
    axpy_line(dst.z, a, src.z);
}

FeatureLineTriple weighted_sum(const std::vector<FeatureLineTriple>& triples,
                               const Eigen::VectorXd& weights) {
    FeatureLineTriple out(triples.front().resolution(), triples.front().channels(),
                          triples.front().bounds);
    for (int i = 0; i < weights.size(); ++i) {
        if (weights[i] != 0.0) axpy_triple(out, weights[i], triples[i]);
    }
    return out;
}

}  // namespace

int FeatureLineBank::line_resolution() const {
    if (!expression.empty()) return expression.front().resolution();
    if (!jaw.empty()) return jaw.front().resolution();
    return 0;
}

int FeatureLineBank::channels() const {
    if (!expression.empty()) return expression.front().channels();
    if (!jaw.empty()) return jaw.front().channels();
    return 0;
}

const Bbox& FeatureLineBank::bounds() const {
    if (!expression.empty()) return expression.front().bounds;
    if (!jaw.empty()) return jaw.front().bounds;
    static const Bbox kEmpty{};
    return kEmpty;
}

void FeatureLineBank::validate() const {
    if (empty()) return;
    const int res = line_resolution();
    const int ch = channels();
    for (const auto& t : expression) {
        if (t.resolution() != res || t.channels() != ch) {
            throw DimensionMismatch("expression line triples must share shape");
        }
    }
    for (const auto& t : jaw) {
        if (t.resolution() != res || t.channels() != ch) {
            throw DimensionMismatch("jaw line triples must share shape");
        }
    }
    if (jaw.size() != jaw_basis.size()) {
        throw DimensionMismatch("jaw triples and basis counts differ");
    }
    for (size_t a = 0; a < jaw_basis.size(); ++a) {
        for (size_t b = a + 1; b < jaw_basis.size(); ++b) {
            if (quat_distance(jaw_basis[a], jaw_basis[b]) <= 0.0) {
                throw DegenerateWeights("jaw basis quaternions must be distinct");
            }
        }
    }
}

ExpressionInput ExpressionInput::neutral(int n_b) {
    ExpressionInput e;
    e.beta = Eigen::VectorXd::Zero(n_b);
    return e;
}

Eigen::VectorXd ExpressionInput::leading(int n) const {
    if (beta.size() < n) {
        throw DimensionMismatch("expression vector shorter than requested prefix");
    }
    return beta.head(n);
}

FeatureLineTriple mix_expression_lines(const FeatureLineBank& bank,
                                       const Eigen::VectorXd& beta) {
    if (bank.expression.empty()) {
        throw DimensionMismatch("bank has no expression lines");
    }
    if (beta.size() != bank.expression_count()) {
        throw DimensionMismatch("beta length must equal expression line count");
    }
    return weighted_sum(bank.expression, beta);
}

Eigen::VectorXd jaw_weights(const UnitQuaternion& q, const FeatureLineBank& bank) {
    const int n = bank.jaw_count();
    if (n < 1) throw DimensionMismatch("bank has no jaw bases");
    Eigen::VectorXd w(n);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        w[k] = 1.0 - quat_distance(q, bank.jaw_basis[k]);
        sum += w[k];
    }
    if (!(sum > 0.0)) {
        throw DegenerateWeights("query quaternion orthogonal to every jaw basis");
    }
    return w / sum;
}

FeatureLineTriple mix_jaw_lines(const FeatureLineBank& bank, const UnitQuaternion& q) {
    return weighted_sum(bank.jaw, jaw_weights(q, bank));
}

std::vector<int> jaw_basis_fps(std::span<const UnitQuaternion> quats, int n) {
    const int count = static_cast<int>(quats.size());
    if (n < 1 || count < n) {
        throw InsufficientSamples("need at least n quaternions for FPS");
    }

    std::vector<int> picked;
    picked.reserve(n);

    // Seed: maximum mean distance to all samples (deterministic, ties to
    // the lowest index).
    int seed = 0;
    double best_mean = -1.0;
    for (int i = 0; i < count; ++i) {
        double mean = 0.0;
        for (int j = 0; j < count; ++j) mean += quat_distance(quats[i], quats[j]);
        mean /= count;
        if (mean > best_mean) {
            best_mean = mean;
            seed = i;
        }
    }
    picked.push_back(seed);

    std::vector<double> min_dist(count);
    for (int i = 0; i < count; ++i) min_dist[i] = quat_distance(quats[i], quats[seed]);

    while (static_cast<int>(picked.size()) < n) {
        int next = -1;
        double best = -1.0;
        for (int i = 0; i < count; ++i) {
            if (std::find(picked.begin(), picked.end(), i) != picked.end()) continue;
            if (min_dist[i] > best) {
                best = min_dist[i];
                next = i;
            }
        }
        picked.push_back(next);
        for (int i = 0; i < count; ++i) {
            min_dist[i] = std::min(min_dist[i], quat_distance(quats[i], quats[next]));
        }
    }
    return picked;
}

void accumulate_mix_backward(std::vector<FeatureLineTriple>& triple_grads,
                             const Eigen::VectorXd& weights,
                             const FeatureLineTriple& mixed_grad) {
    if (static_cast<int>(triple_grads.size()) != weights.size()) {
        throw DimensionMismatch("mix backward weight count");
    }
    for (int i = 0; i < weights.size(); ++i) {
        if (weights[i] != 0.0) axpy_triple(triple_grads[i], weights[i], mixed_grad);
    }
}

}  // namespace ctav
