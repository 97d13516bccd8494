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

/// Axis-aligned bounding box used to normalize sample positions to [0,1]^3.
struct Bbox {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Ones();

    bool contains(const Vec3& p) const {
        return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() &&
               p.y() <= max.y() && p.z() >= min.z() && p.z() <= max.z();
    }
    Vec3 extent() const { return max - min; }
    double diagonal() const { return extent().norm(); }
    Bbox padded(double fraction) const;
};

/// res x res 2D feature grid, row-major (iy * res + ix) * channels + c.
struct PlaneGrid {
    int res = 0;
    int channels = 0;
    std::vector<double> data;

    PlaneGrid() = default;
    PlaneGrid(int res_, int channels_)
        : res(res_), channels(channels_),
          data(static_cast<size_t>(res_) * res_ * channels_, 0.0) {}

    double& at(int ix, int iy, int c) {
        return data[(static_cast<size_t>(iy) * res + ix) * channels + c];
    }
    double at(int ix, int iy, int c) const {
        return data[(static_cast<size_t>(iy) * res + ix) * channels + c];
    }
};

/// res-long 1D feature grid, (i * channels + c).
struct LineGrid {
    int res = 0;
    int channels = 0;
    std::vector<double> data;

    LineGrid() = default;
    LineGrid(int res_, int channels_)
        : res(res_), channels(channels_),
          data(static_cast<size_t>(res_) * channels_, 0.0) {}

    double& at(int i, int c) { return data[static_cast<size_t>(i) * channels + c]; }
    double at(int i, int c) const {
        return data[static_cast<size_t>(i) * channels + c];
    }
};

/// Three axis-aligned feature planes over a canonical-space box. The xy plane
/// may carry more channels than the xz/yz planes.
struct Triplane {
    PlaneGrid xy, xz, yz;
    Bbox bounds;

    Triplane() = default;
    Triplane(int res, int channels_xy, int channels_side, const Bbox& bounds_);

    int resolution() const { return xy.res; }
    int feature_dim() const { return xy.channels + xz.channels + yz.channels; }

    void set_zero();
    /// Fills all grids with fp32-representable uniforms in [-scale, scale].
    void fill_uniform(std::mt19937_64& rng, double scale);
};

/// Per-blendshape triple of 1D feature lines sharing a bounding box.
struct FeatureLineTriple {
    LineGrid x, y, z;
    Bbox bounds;

    FeatureLineTriple() = default;
    FeatureLineTriple(int res, int channels, const Bbox& bounds_);

    int resolution() const { return x.res; }
    int channels() const { return x.channels; }
    int feature_dim() const { return 3 * x.channels; }

    void set_zero();
    void fill_uniform(std::mt19937_64& rng, double scale);
};

/// Projects p onto the three planes, bilinearly interpolates each, and
/// concatenates features in (xy, xz, yz) order. Coordinates are normalized by
/// the bounding box and clamped to [0,1]. `out` must have feature_dim()
/// entries.
void triplane_sample(const Triplane& tp, const Vec3& p, std::span<double> out);

/// Accumulates d(sum upstream_i * out_i) into grid_grad (same shape as tp)
/// and grad_p. Exactly the four texels touched per plane receive gradient.
void triplane_sample_backward(const Triplane& tp, const Vec3& p,
                              std::span<const double> upstream,
                              Triplane& grid_grad, Vec3& grad_p);

/// Linear interpolation of each 1D line at the matching coordinate of p,
/// concatenated in (x, y, z) order. `out` must have 3 * channels() entries.
void line_sample(const FeatureLineTriple& lt, const Vec3& p,
                 std::span<double> out);

/// Accumulates gradients into line_grad and grad_p; at most two columns per
/// axis are touched.
void line_sample_backward(const FeatureLineTriple& lt, const Vec3& p,
                          std::span<const double> upstream,
                          FeatureLineTriple& line_grad, Vec3& grad_p);

}  // namespace ctav
