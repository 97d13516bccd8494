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
#include "ctav/synthrig.hpp"

#include <cmath>
#include <random>

namespace ctav {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Head proportions applied to the unit sphere (x width, y height, z depth).
const Vec3 kHeadScale(0.78, 1.0, 0.92);

// Smooth radial bump with exact zero outside 2.5 standard radii.
double bump_weight(double dist, double rho) {
    const double cut = 2.5 * rho;
    if (dist >= cut) return 0.0;
    const double tail = std::exp(-0.5 * 2.5 * 2.5);
    const double w = std::exp(-0.5 * (dist / rho) * (dist / rho));
    return (w - tail) / (1.0 - tail);
}

// Blendshape placement on the front hemisphere: a fixed set of face
// landmarks first, golden-angle spiral afterwards.
Vec3 bump_center(int i) {
    static const Vec3 landmarks[] = {
        {0.00, 0.45, 0.86},    // brow
        {-0.45, -0.05, 0.85},  // left cheek
        {0.45, -0.05, 0.85},   // right cheek
        {0.00, -0.38, 0.90},   // mouth
        {0.00, 0.62, 0.72},    // forehead
        {0.00, 0.05, 0.99},    // nose
        {-0.30, 0.40, 0.85},   // left brow
        {0.30, 0.40, 0.85},    // right brow
    };
    constexpr int n_landmarks = sizeof(landmarks) / sizeof(landmarks[0]);
    if (i < n_landmarks) return landmarks[i].normalized();
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    const int j = i - n_landmarks;
    const double y = 0.7 - 1.2 * ((j % 7) / 7.0);
    const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
    const double a = golden * i;
    // Front hemisphere only: fold x-component magnitude into [-0.9, 0.9].
    const double x = 0.9 * r * std::sin(a);
    const double z = std::sqrt(std::max(0.05, 1.0 - x * x - y * y));
    return Vec3(x, y, z).normalized();
}

}  // namespace

std::vector<int> SyntheticRig::eye_vertices() const {
    std::vector<int> out;
    for (int v = 0; v < vertex_count(); ++v) {
        if (region[v] == VertexRegion::Eye) out.push_back(v);
    }
    return out;
}

std::vector<std::uint8_t> SyntheticRig::static_face_mask() const {
    std::vector<std::uint8_t> mask(faces.size(), 0);
    for (size_t f = 0; f < faces.size(); ++f) {
        mask[f] = region[faces[f][0]] == VertexRegion::Static &&
                          region[faces[f][1]] == VertexRegion::Static &&
                          region[faces[f][2]] == VertexRegion::Static
                      ? 1
                      : 0;
    }
    return mask;
}

Bbox SyntheticRig::neutral_bounds() const {
    Bbox bb;
    bb.min = bb.max = base_vertices.front();
    for (const Vec3& v : base_vertices) {
        bb.min = bb.min.cwiseMin(v);
        bb.max = bb.max.cwiseMax(v);
    }
    return bb;
}

Bbox SyntheticRig::facial_bounds() const {
    Bbox bb;
    bool first = true;
    for (const Vec3& v : base_vertices) {
        if (v.z() <= 0.0) continue;
        if (first) {
            bb.min = bb.max = v;
            first = false;
        } else {
            bb.min = bb.min.cwiseMin(v);
            bb.max = bb.max.cwiseMax(v);
        }
    }
    if (first) return neutral_bounds();
    return bb;
}

SyntheticRig build_rig(const RigConfig& config, std::uint64_t seed) {
    const int rings = config.rings;
    const int segments = config.segments;
    const int n_b = config.n_blendshapes;
    const int V = rings * segments + 2;
    if (n_b < 1) throw ConfigInvalid("rig needs at least one blendshape");
    if (rings < 2 || segments < 3 || V < 12) {
        throw ConfigInvalid("rig mesh too small (need >= 12 vertices)");
    }

    SyntheticRig rig;
    rig.config = config;
    rig.seed = seed;
    std::mt19937_64 rng(seed);

    // Unit-sphere directions, kept for region tests and bump falloffs.
    std::vector<Vec3> sphere(V);
    sphere[0] = Vec3(0, 1, 0);
    for (int i = 0; i < rings; ++i) {
        const double theta = kPi * (i + 1) / (rings + 1);
        for (int j = 0; j < segments; ++j) {
            const double phi = 2.0 * kPi * j / segments;
            sphere[1 + i * segments + j] =
                Vec3(std::sin(theta) * std::sin(phi), std::cos(theta),
                     std::sin(theta) * std::cos(phi));
        }
    }
    sphere[V - 1] = Vec3(0, -1, 0);

    // Regions in unit-sphere coordinates.
    const Vec3 eye_l = Vec3(-0.32, 0.32, 0.89).normalized();
    const Vec3 eye_r = Vec3(0.32, 0.32, 0.89).normalized();
    rig.region.assign(V, VertexRegion::Other);
    rig.jaw_mask.assign(V, 0);
    for (int v = 0; v < V; ++v) {
        const Vec3& s = sphere[v];
        if ((s - eye_l).norm() < 0.24 || (s - eye_r).norm() < 0.24) {
            rig.region[v] = VertexRegion::Eye;
        } else if (s.y() < -0.30 && s.z() > 0.20) {
            rig.region[v] = VertexRegion::Jaw;
            rig.jaw_mask[v] = 1;
        } else if (s.z() < -0.20) {
            rig.region[v] = VertexRegion::Static;
        }
    }

    // Base mesh: scaled ellipsoid with a mild chin protrusion on the flap.
    rig.base_vertices.resize(V);
    const Vec3 chin_dir = Vec3(0.0, -0.35, 0.93).normalized();
    for (int v = 0; v < V; ++v) {
        Vec3 p = sphere[v].cwiseProduct(kHeadScale);
        if (rig.jaw_mask[v]) {
            const double w = bump_weight((sphere[v] - Vec3(0, -0.55, 0.82).normalized()).norm(), 0.35);
            p += 0.10 * w * chin_dir;
        }
        rig.base_vertices[v] = p;
    }

    rig.jaw_pivot = Vec3(0.0, -0.12, 0.05);
    rig.jaw_axis = Vec3::UnitX();

    // Faces (outward winding).
    auto ring_vertex = [&](int i, int j) { return 1 + i * segments + (j % segments); };
    for (int j = 0; j < segments; ++j) {
        rig.faces.push_back({0, ring_vertex(0, j), ring_vertex(0, j + 1)});
    }
    for (int i = 0; i + 1 < rings; ++i) {
        for (int j = 0; j < segments; ++j) {
            const int a = ring_vertex(i, j), b = ring_vertex(i, j + 1);
            const int c = ring_vertex(i + 1, j), d = ring_vertex(i + 1, j + 1);
            rig.faces.push_back({a, c, b});
            rig.faces.push_back({b, c, d});
        }
    }
    for (int j = 0; j < segments; ++j) {
        rig.faces.push_back({V - 1, ring_vertex(rings - 1, j + 1), ring_vertex(rings - 1, j)});
    }

    // Expression deltas: localized radial bumps with seeded amplitude jitter.
    std::uniform_real_distribution<double> amp_jitter(0.9, 1.15);
    rig.expr_deltas.assign(n_b, std::vector<Vec3>(V, Vec3::Zero()));
    for (int b = 0; b < n_b; ++b) {
        const Vec3 center = bump_center(b);
        const double rho = 0.22 + 0.04 * (b % 4);
        const double amp = (b == 0 ? 0.16 : 0.11) * amp_jitter(rng) * (b % 3 == 2 ? -0.85 : 1.0);
        for (int v = 0; v < V; ++v) {
            const double w = bump_weight((sphere[v] - center).norm(), rho);
            if (w > 0.0) rig.expr_deltas[b][v] = amp * w * sphere[v];
        }
    }
    return rig;
}

std::vector<Vec3> eval_rig(const SyntheticRig& rig, const Eigen::VectorXd& beta,
                           const UnitQuaternion& q_jaw) {
    if (beta.size() != rig.blendshape_count()) {
        throw DimensionMismatch("beta length must equal rig blendshape count");
    }
    std::vector<Vec3> out = rig.base_vertices;
    for (int b = 0; b < rig.blendshape_count(); ++b) {
        const double w = beta[b];
        if (w == 0.0) continue;
        const auto& delta = rig.expr_deltas[b];
        for (size_t v = 0; v < out.size(); ++v) out[v] += w * delta[v];
    }
    const Mat3 R = q_jaw.to_rotation_matrix();
    if (!R.isIdentity(0.0)) {
        for (size_t v = 0; v < out.size(); ++v) {
            if (rig.jaw_mask[v]) {
                out[v] = rig.jaw_pivot + R * (out[v] - rig.jaw_pivot);
            }
        }
    }
    return out;
}

}  // namespace ctav
