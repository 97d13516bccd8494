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
#include "ctav/fields.hpp"

#include <cmath>

namespace ctav {

namespace {

struct AxisCoord {
    int i0 = 0;
    double frac = 0.0;   // weight of i0+1
    double dgrid = 0.0;  // d(grid coord)/d(p_axis); 0 when clamped
};

AxisCoord normalize_axis(double p, double lo, double hi, int res) {
    AxisCoord a;
    const double span = hi - lo;
    double u = (p - lo) / span;
    double dgrid = (res - 1) / span;
    if (u <= 0.0) {
        u = 0.0;
        dgrid = 0.0;
    } else if (u >= 1.0) {
        u = 1.0;
        dgrid = 0.0;
    }
    const double g = u * (res - 1);
    int i0 = static_cast<int>(std::floor(g));
    if (i0 > res - 2) i0 = res - 2;
    a.i0 = i0;
    a.frac = g - i0;
    a.dgrid = dgrid;
    return a;
}

void fill_uniform_fp32(std::vector<double>& v, std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (double& x : v) x = static_cast<double>(static_cast<float>(dist(rng)));
}

// Bilinear sample of all channels of one plane at (a, b); out += is not
// wanted here, plain write.
void plane_sample(const PlaneGrid& g, const AxisCoord& a, const AxisCoord& b,
                  double* out) {
    const double w00 = (1 - a.frac) * (1 - b.frac);
    const double w10 = a.frac * (1 - b.frac);
    const double w01 = (1 - a.frac) * b.frac;
    const double w11 = a.frac * b.frac;
    for (int c = 0; c < g.channels; ++c) {
        out[c] = w00 * g.at(a.i0, b.i0, c) + w10 * g.at(a.i0 + 1, b.i0, c) +
                 w01 * g.at(a.i0, b.i0 + 1, c) + w11 * g.at(a.i0 + 1, b.i0 + 1, c);
    }
}

// Accumulates gradients of one plane sample. grad_a/grad_b collect the
// gradient w.r.t. the two grid coordinates (before the dgrid chain).
void plane_sample_backward(const PlaneGrid& g, const AxisCoord& a,
                           const AxisCoord& b, const double* upstream,
                           PlaneGrid& grad, double& grad_a, double& grad_b) {
    const double w00 = (1 - a.frac) * (1 - b.frac);
    const double w10 = a.frac * (1 - b.frac);
    const double w01 = (1 - a.frac) * b.frac;
    const double w11 = a.frac * b.frac;
    for (int c = 0; c < g.channels; ++c) {
        const double u = upstream[c];
        grad.at(a.i0, b.i0, c) += u * w00;
        grad.at(a.i0 + 1, b.i0, c) += u * w10;
        grad.at(a.i0, b.i0 + 1, c) += u * w01;
        grad.at(a.i0 + 1, b.i0 + 1, c) += u * w11;

        const double d00 = g.at(a.i0, b.i0, c);
        const double d10 = g.at(a.i0 + 1, b.i0, c);
        const double d01 = g.at(a.i0, b.i0 + 1, c);
        const double d11 = g.at(a.i0 + 1, b.i0 + 1, c);
        grad_a += u * ((1 - b.frac) * (d10 - d00) + b.frac * (d11 - d01));
        grad_b += u * ((1 - a.frac) * (d01 - d00) + a.frac * (d11 - d10));
    }
}

}  // namespace

Bbox Bbox::padded(double fraction) const {
    const Vec3 pad = fraction * extent();
    return Bbox{min - pad, max + pad};
}

Triplane::Triplane(int res, int channels_xy, int channels_side, const Bbox& bounds_)
    : xy(res, channels_xy), xz(res, channels_side), yz(res, channels_side),
      bounds(bounds_) {
    if (res < 2 || channels_xy <= 0 || channels_side <= 0) {
        throw ConfigInvalid("triplane needs res >= 2 and positive channel counts");
    }
}

void Triplane::set_zero() {
    std::fill(xy.data.begin(), xy.data.end(), 0.0);
    std::fill(xz.data.begin(), xz.data.end(), 0.0);
    std::fill(yz.data.begin(), yz.data.end(), 0.0);
}

void Triplane::fill_uniform(std::mt19937_64& rng, double scale) {
    fill_uniform_fp32(xy.data, rng, scale);
    fill_uniform_fp32(xz.data, rng, scale);
    fill_uniform_fp32(yz.data, rng, scale);
}

FeatureLineTriple::FeatureLineTriple(int res, int channels, const Bbox& bounds_)
    : x(res, channels), y(res, channels), z(res, channels), bounds(bounds_) {
    if (res < 2 || channels <= 0) {
        throw ConfigInvalid("feature line needs res >= 2 and positive channels");
    }
}

void FeatureLineTriple::set_zero() {
    std::fill(x.data.begin(), x.data.end(), 0.0);
    std::fill(y.data.begin(), y.data.end(), 0.0);
    std::fill(z.data.begin(), z.data.end(), 0.0);
}

void FeatureLineTriple::fill_uniform(std::mt19937_64& rng, double scale) {
    fill_uniform_fp32(x.data, rng, scale);
    fill_uniform_fp32(y.data, rng, scale);
    fill_uniform_fp32(z.data, rng, scale);
}

void triplane_sample(const Triplane& tp, const Vec3& p, std::span<double> out) {
    if (static_cast<int>(out.size()) != tp.feature_dim()) {
        throw DimensionMismatch("triplane_sample output size");
    }
    const Bbox& bb = tp.bounds;
    const AxisCoord ux = normalize_axis(p.x(), bb.min.x(), bb.max.x(), tp.xy.res);
    const AxisCoord uy = normalize_axis(p.y(), bb.min.y(), bb.max.y(), tp.xy.res);
    const AxisCoord uz = normalize_axis(p.z(), bb.min.z(), bb.max.z(), tp.xy.res);

    double* o = out.data();
    plane_sample(tp.xy, ux, uy, o);
    plane_sample(tp.xz, ux, uz, o + tp.xy.channels);
    plane_sample(tp.yz, uy, uz, o + tp.xy.channels + tp.xz.channels);
}

void triplane_sample_backward(const Triplane& tp, const Vec3& p,
                              std::span<const double> upstream,
                              Triplane& grid_grad, Vec3& grad_p) {
    if (static_cast<int>(upstream.size()) != tp.feature_dim()) {
        throw DimensionMismatch("triplane_sample_backward upstream size");
    }
    const Bbox& bb = tp.bounds;
    const AxisCoord ux = normalize_axis(p.x(), bb.min.x(), bb.max.x(), tp.xy.res);
    const AxisCoord uy = normalize_axis(p.y(), bb.min.y(), bb.max.y(), tp.xy.res);
    const AxisCoord uz = normalize_axis(p.z(), bb.min.z(), bb.max.z(), tp.xy.res);

    const double* u = upstream.data();
    double gx = 0.0, gy = 0.0, gz = 0.0;
    {
        double ga = 0.0, gb = 0.0;
        plane_sample_backward(tp.xy, ux, uy, u, grid_grad.xy, ga, gb);
        gx += ga;
        gy += gb;
    }
    {
        double ga = 0.0, gb = 0.0;
        plane_sample_backward(tp.xz, ux, uz, u + tp.xy.channels, grid_grad.xz, ga,
                              gb);
        gx += ga;
        gz += gb;
    }
    {
        double ga = 0.0, gb = 0.0;
        plane_sample_backward(tp.yz, uy, uz, u + tp.xy.channels + tp.xz.channels,
                              grid_grad.yz, ga, gb);
        gy += ga;
        gz += gb;
    }
    grad_p.x() += gx * ux.dgrid;
    grad_p.y() += gy * uy.dgrid;
    grad_p.z() += gz * uz.dgrid;
}

void line_sample(const FeatureLineTriple& lt, const Vec3& p, std::span<double> out) {
    if (static_cast<int>(out.size()) != lt.feature_dim()) {
        throw DimensionMismatch("line_sample output size");
    }
    const Bbox& bb = lt.bounds;
    const LineGrid* lines[3] = {&lt.x, &lt.y, &lt.z};
    for (int axis = 0; axis < 3; ++axis) {
        const LineGrid& g = *lines[axis];
        const AxisCoord a =
            normalize_axis(p[axis], bb.min[axis], bb.max[axis], g.res);
        double* o = out.data() + axis * g.channels;
        for (int c = 0; c < g.channels; ++c) {
            o[c] = (1 - a.frac) * g.at(a.i0, c) + a.frac * g.at(a.i0 + 1, c);
        }
    }
}

void line_sample_backward(const FeatureLineTriple& lt, const Vec3& p,
                          std::span<const double> upstream,
                          FeatureLineTriple& line_grad, Vec3& grad_p) {
    if (static_cast<int>(upstream.size()) != lt.feature_dim()) {
        throw DimensionMismatch("line_sample_backward upstream size");
    }
    const Bbox& bb = lt.bounds;
    const LineGrid* lines[3] = {&lt.x, &lt.y, &lt.z};
    LineGrid* grads[3] = {&line_grad.x, &line_grad.y, &line_grad.z};
    for (int axis = 0; axis < 3; ++axis) {
        const LineGrid& g = *lines[axis];
        LineGrid& gg = *grads[axis];
        const AxisCoord a =
            normalize_axis(p[axis], bb.min[axis], bb.max[axis], g.res);
        const double* u = upstream.data() + axis * g.channels;
        double gcoord = 0.0;
        for (int c = 0; c < g.channels; ++c) {
            gg.at(a.i0, c) += u[c] * (1 - a.frac);
            gg.at(a.i0 + 1, c) += u[c] * a.frac;
            gcoord += u[c] * (g.at(a.i0 + 1, c) - g.at(a.i0, c));
        }
        grad_p[axis] += gcoord * a.dgrid;
    }
}

}  // namespace ctav
