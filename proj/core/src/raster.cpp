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
#include "ctav/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ctav {

namespace {

// 3-sigma footprint, used as the pixel iteration bound alongside the exact
// Mahalanobis test.
double footprint_radius(const Mat2& cov, int width, int height) {
    const double a = cov(0, 0), b = cov(0, 1), c = cov(1, 1);
    const double half_trace = 0.5 * (a + c);
    const double disc = std::sqrt(std::max(0.0, half_trace * half_trace - (a * c - b * b)));
    const double lambda_max = half_trace + disc;
    const double r = 3.0 * std::sqrt(std::max(0.0, lambda_max));
    return std::min(r, 2.0 * static_cast<double>(std::max(width, height)));
}

Mat2 invert_2x2(const Mat2& m) {
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    Mat2 inv;
    inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return inv / det;
}

struct ProjectionScratch {
    Vec3 x_cam;
    Eigen::Matrix<double, 2, 3> J;
};

ProjectionScratch projection_terms(const Camera& cam, const Vec3& mu) {
    ProjectionScratch s;
    s.x_cam = cam.world_to_camera(mu);
    const double x = s.x_cam.x(), y = s.x_cam.y(), z = s.x_cam.z();
    s.J << cam.fx / z, 0.0, -cam.fx * x / (z * z),
           0.0, cam.fy / z, -cam.fy * y / (z * z);
    return s;
}

}  // namespace

void RasterGrads::resize_zero(size_t n) {
    mean.assign(n, Vec2::Zero());
    cov.assign(n, Mat2::Zero());
    rgb.assign(n, Vec3::Zero());
    alpha.assign(n, 0.0);
}

std::vector<Projected2DGaussian> project(const FrameAttributes& attrs,
                                         const Camera& cam) {
    cam.validate();
    std::vector<Projected2DGaussian> out;
    out.reserve(attrs.count());
    for (int i = 0; i < attrs.count(); ++i) {
        const ProjectionScratch s = projection_terms(cam, attrs.mu[i]);
        const double z = s.x_cam.z();
        if (z <= kNearPlane) continue;

        Projected2DGaussian g;
        g.mean = Vec2(cam.fx * s.x_cam.x() / z + cam.cx,
                      cam.fy * s.x_cam.y() / z + cam.cy);
        const Vec3& sc = attrs.scale[i];
        const Mat3 sigma_world =
            attrs.rot[i] * sc.cwiseProduct(sc).asDiagonal() * attrs.rot[i].transpose();
        const Mat3 sigma_cam = cam.R * sigma_world * cam.R.transpose();
        g.cov = s.J * sigma_cam * s.J.transpose() + kCovRegularizer * Mat2::Identity();
        g.depth = z;
        g.rgb = attrs.rgb[i];
        g.alpha = attrs.alpha[i];
        g.splat_index = i;
        out.push_back(g);
    }
    return out;
}

Image blend(std::span<const Projected2DGaussian> gaussians, int width, int height,
            const Vec3& background, BlendCache* cache, ThreadPool* pool) {
    if (width < 1 || height < 1) throw ConfigInvalid("blend image size");

    BlendCache local;
    BlendCache& c = cache ? *cache : local;
    c.width = width;
    c.height = height;
    c.per_pixel.resize(static_cast<size_t>(width) * height);
    for (auto& v : c.per_pixel) v.clear();
    c.inv_cov.resize(gaussians.size());

    // Global depth sort, ties to the lower splat index.
    std::vector<std::uint32_t> order(gaussians.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (gaussians[a].depth != gaussians[b].depth) {
            return gaussians[a].depth < gaussians[b].depth;
        }
        return gaussians[a].splat_index < gaussians[b].splat_index;
    });
    for (size_t g = 0; g < gaussians.size(); ++g) {
        c.inv_cov[g] = invert_2x2(gaussians[g].cov);
    }

    // Contributor lists, built in depth order per row chunk.
    parallel_chunks(pool, height, [&](int, std::int64_t row0, std::int64_t row1) {
        for (const std::uint32_t gi : order) {
            const Projected2DGaussian& g = gaussians[gi];
            const double r = footprint_radius(g.cov, width, height);
            const int x0 = std::max(0, static_cast<int>(std::floor(g.mean.x() - r - 0.5)));
            const int x1 = std::min(width - 1, static_cast<int>(std::ceil(g.mean.x() + r - 0.5)));
            const int y0 = std::max<int>(row0, static_cast<int>(std::floor(g.mean.y() - r - 0.5)));
            const int y1 = std::min<int>(row1 - 1, static_cast<int>(std::ceil(g.mean.y() + r - 0.5)));
            const Mat2& ic = c.inv_cov[gi];
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const Vec2 delta(x + 0.5 - g.mean.x(), y + 0.5 - g.mean.y());
                    const double m = delta.dot(ic * delta);
                    if (m > 9.0) continue;  // outside the 3-sigma ellipse
                    const double w = g.alpha * std::exp(-0.5 * m);
                    if (w < kMinBlendWeight) continue;
                    c.per_pixel[static_cast<size_t>(y) * width + x].push_back(
                        BlendEntry{gi, w});
                }
            }
        }
    });

    Image img(width, height);
    parallel_chunks(pool, static_cast<std::int64_t>(img.pixel_count()),
                    [&](int, std::int64_t p0, std::int64_t p1) {
                        for (std::int64_t p = p0; p < p1; ++p) {
                            double transmittance = 1.0;
                            Vec3 acc = Vec3::Zero();
                            for (const BlendEntry& e : c.per_pixel[p]) {
                                acc += transmittance * e.weight * gaussians[e.gauss].rgb;
                                transmittance *= 1.0 - e.weight;
                            }
                            acc += transmittance * background;
                            img.data[p * 3 + 0] = acc.x();
                            img.data[p * 3 + 1] = acc.y();
                            img.data[p * 3 + 2] = acc.z();
                        }
                    });
    return img;
}

RasterGrads blend_backward(std::span<const Projected2DGaussian> gaussians,
                           const BlendCache& cache, const Image& loss_grad,
                           const Vec3& background, ThreadPool* pool) {
    if (loss_grad.width != cache.width || loss_grad.height != cache.height) {
        throw DimensionMismatch("blend_backward image size");
    }
    const int lanes = pool ? pool->size() : 1;
    std::vector<RasterGrads> partial(lanes);
    for (auto& p : partial) p.resize_zero(gaussians.size());

    parallel_chunks(
        pool, static_cast<std::int64_t>(loss_grad.pixel_count()),
        [&](int lane, std::int64_t p0, std::int64_t p1) {
            RasterGrads& acc = partial[lane];
            std::vector<double> transmittance;
            for (std::int64_t p = p0; p < p1; ++p) {
                const auto& entries = cache.per_pixel[p];
                if (entries.empty()) continue;
                const Vec3 g_pix(loss_grad.data[p * 3 + 0], loss_grad.data[p * 3 + 1],
                                 loss_grad.data[p * 3 + 2]);
                if (g_pix.isZero(0.0)) continue;
                const int x = static_cast<int>(p % cache.width);
                const int y = static_cast<int>(p / cache.width);

                transmittance.assign(entries.size(), 1.0);
                for (size_t i = 1; i < entries.size(); ++i) {
                    transmittance[i] = transmittance[i - 1] * (1.0 - entries[i - 1].weight);
                }

                // rest = composited color behind layer i; walking back to front
                // gives dC/dw_i = T_i (c_i - rest) without divisions.
                Vec3 rest = background;
                for (size_t i = entries.size(); i-- > 0;) {
                    const BlendEntry& e = entries[i];
                    const Projected2DGaussian& gau = gaussians[e.gauss];
                    const double Ti = transmittance[i];
                    acc.rgb[e.gauss] += g_pix * (Ti * e.weight);
                    const double dw = g_pix.dot(Ti * (gau.rgb - rest));

                    const Vec2 delta(x + 0.5 - gau.mean.x(), y + 0.5 - gau.mean.y());
                    const Vec2 icd = cache.inv_cov[e.gauss] * delta;
                    acc.alpha[e.gauss] += dw * (e.weight / gau.alpha);
                    acc.mean[e.gauss] += dw * e.weight * icd;
                    acc.cov[e.gauss] += (0.5 * dw * e.weight) * (icd * icd.transpose());

                    rest = e.weight * gau.rgb + (1.0 - e.weight) * rest;
                }
            }
        });

    RasterGrads out = std::move(partial[0]);
    for (int lane = 1; lane < lanes; ++lane) {
        for (size_t g = 0; g < gaussians.size(); ++g) {
            out.mean[g] += partial[lane].mean[g];
            out.cov[g] += partial[lane].cov[g];
            out.rgb[g] += partial[lane].rgb[g];
            out.alpha[g] += partial[lane].alpha[g];
        }
    }
    return out;
}

void project_backward(const FrameAttributes& attrs, const Camera& cam,
                      std::span<const Projected2DGaussian> gaussians,
                      const RasterGrads& upstream, FrameGrads& out,
                      ThreadPool* pool) {
    if (upstream.mean.size() != gaussians.size()) {
        throw DimensionMismatch("project_backward upstream size");
    }
    parallel_chunks(pool, static_cast<std::int64_t>(gaussians.size()),
                    [&](int, std::int64_t g0, std::int64_t g1) {
        for (std::int64_t gi = g0; gi < g1; ++gi) {
            const Projected2DGaussian& g = gaussians[gi];
            const int i = g.splat_index;
            const ProjectionScratch s = projection_terms(cam, attrs.mu[i]);
            const double x = s.x_cam.x(), y = s.x_cam.y(), z = s.x_cam.z();

            const Vec3& sc = attrs.scale[i];
            const Mat3& rot = attrs.rot[i];
            const Mat3 sigma_world = rot * sc.cwiseProduct(sc).asDiagonal() * rot.transpose();
            const Mat3 sigma_cam = cam.R * sigma_world * cam.R.transpose();

            const Mat2& d_cov = upstream.cov[gi];
            const Vec2& d_mean = upstream.mean[gi];

            // cov2d = J M J^T: dL/dJ = (G + G^T) J M, dL/dM = J^T G J.
            const Eigen::Matrix<double, 2, 3> dJ =
                (d_cov + d_cov.transpose()) * s.J * sigma_cam;
            const Mat3 d_sigma_cam = s.J.transpose() * d_cov * s.J;
            const Mat3 d_sigma_world = cam.R.transpose() * d_sigma_cam * cam.R;

            // Sigma_world = r diag(s^2) r^T.
            const Mat3 sym2 = d_sigma_world + d_sigma_world.transpose();
            out.rot[i] += sym2 * rot * sc.cwiseProduct(sc).asDiagonal();
            const Mat3 rtr = rot.transpose() * d_sigma_world * rot;
            for (int k = 0; k < 3; ++k) {
                out.scale[i][k] += 2.0 * sc[k] * rtr(k, k);
            }

            // Mean path plus the Jacobian's own dependence on x_cam.
            Vec3 d_xcam = s.J.transpose() * d_mean;
            const double z2 = z * z, z3 = z2 * z;
            d_xcam.x() += dJ(0, 2) * (-cam.fx / z2);
            d_xcam.y() += dJ(1, 2) * (-cam.fy / z2);
            d_xcam.z() += dJ(0, 0) * (-cam.fx / z2) + dJ(0, 2) * (2.0 * cam.fx * x / z3) +
                          dJ(1, 1) * (-cam.fy / z2) + dJ(1, 2) * (2.0 * cam.fy * y / z3);
            out.mu[i] += cam.R.transpose() * d_xcam;

            out.rgb[i] += upstream.rgb[gi];
            out.alpha[i] += upstream.alpha[gi];
        }
    });
}

}  // namespace ctav
