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

// Independent brute-force reference implementations. These stay deliberately
// naive (scalar loops, no shared helpers with the library) so they can serve
// as oracles for the optimized paths.

#include <algorithm>
#include <map>
#include <vector>

#include "ctav/decoder.hpp"
#include "ctav/fields.hpp"
#include "ctav/geometry.hpp"
#include "ctav/image.hpp"

namespace ctav::oracle {

// Scalar bilinear interpolation of one plane channel at normalized (u, v).
inline double bilinear_1ch(const PlaneGrid& g, double u, double v, int c) {
    u = std::clamp(u, 0.0, 1.0);
    v = std::clamp(v, 0.0, 1.0);
    const double gx = u * (g.res - 1);
    const double gy = v * (g.res - 1);
    int ix = static_cast<int>(std::floor(gx));
    int iy = static_cast<int>(std::floor(gy));
    ix = std::min(ix, g.res - 2);
    iy = std::min(iy, g.res - 2);
    const double fx = gx - ix;
    const double fy = gy - iy;
    return (1 - fx) * (1 - fy) * g.at(ix, iy, c) + fx * (1 - fy) * g.at(ix + 1, iy, c) +
           (1 - fx) * fy * g.at(ix, iy + 1, c) + fx * fy * g.at(ix + 1, iy + 1, c);
}

inline std::vector<double> triplane_sample_ref(const Triplane& tp, const Vec3& p) {
    const auto norm = [&](int axis) {
        return (p[axis] - tp.bounds.min[axis]) /
               (tp.bounds.max[axis] - tp.bounds.min[axis]);
    };
    std::vector<double> out;
    for (int c = 0; c < tp.xy.channels; ++c) {
        out.push_back(bilinear_1ch(tp.xy, norm(0), norm(1), c));
    }
    for (int c = 0; c < tp.xz.channels; ++c) {
        out.push_back(bilinear_1ch(tp.xz, norm(0), norm(2), c));
    }
    for (int c = 0; c < tp.yz.channels; ++c) {
        out.push_back(bilinear_1ch(tp.yz, norm(1), norm(2), c));
    }
    return out;
}

inline double linear_1ch(const LineGrid& g, double u, int c) {
    u = std::clamp(u, 0.0, 1.0);
    const double gx = u * (g.res - 1);
    int i = std::min(static_cast<int>(std::floor(gx)), g.res - 2);
    const double f = gx - i;
    return (1 - f) * g.at(i, c) + f * g.at(i + 1, c);
}

inline std::vector<double> line_sample_ref(const FeatureLineTriple& lt, const Vec3& p) {
    std::vector<double> out;
    const LineGrid* lines[3] = {&lt.x, &lt.y, &lt.z};
    for (int axis = 0; axis < 3; ++axis) {
        const double u = (p[axis] - lt.bounds.min[axis]) /
                         (lt.bounds.max[axis] - lt.bounds.min[axis]);
        for (int c = 0; c < lines[axis]->channels; ++c) {
            out.push_back(linear_1ch(*lines[axis], u, c));
        }
    }
    return out;
}

// Plain GEMV forward of an MLP (scalar loops, explicit activations).
inline std::vector<double> mlp_forward_ref(const MlpParams& p,
                                           const std::vector<double>& x) {
    std::vector<double> a = x;
    for (size_t l = 0; l < p.layers.size(); ++l) {
        const auto& layer = p.layers[l];
        std::vector<double> z(layer.W.rows());
        for (int r = 0; r < layer.W.rows(); ++r) {
            double s = layer.b[r];
            for (int c = 0; c < layer.W.cols(); ++c) s += layer.W(r, c) * a[c];
            z[r] = s;
        }
        if (l + 1 < p.layers.size()) {
            for (double& v : z) v = v > 0 ? v : 0.0;
        } else {
            for (double& v : z) {
                switch (p.head) {
                    case HeadActivation::Linear: break;
                    case HeadActivation::Sigmoid: v = 1.0 / (1.0 + std::exp(-v)); break;
                    case HeadActivation::Tanh: v = std::tanh(v); break;
                }
            }
        }
        a = std::move(z);
    }
    return a;
}

// Direct sliding-window SSIM with an explicit 2D Gaussian window, matching
// the stated convention (11x11 sigma 1.5 valid placement, window shrunk for
// small images).
inline double ssim_ref(const Image& a, const Image& b) {
    const int W = a.width, H = a.height;
    int win = std::min({11, W, H});
    if (win % 2 == 0) --win;
    std::vector<double> g(static_cast<size_t>(win) * win);
    const int half = win / 2;
    double sum = 0.0;
    for (int y = 0; y < win; ++y) {
        for (int x = 0; x < win; ++x) {
            const double dx = x - half, dy = y - half;
            g[static_cast<size_t>(y) * win + x] = std::exp(-(dx * dx + dy * dy) / (2 * 1.5 * 1.5));
            sum += g[static_cast<size_t>(y) * win + x];
        }
    }
    for (double& v : g) v /= sum;

    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double total = 0.0;
    int count = 0;
    for (int ch = 0; ch < 3; ++ch) {
        for (int wy = 0; wy + win <= H; ++wy) {
            for (int wx = 0; wx + win <= W; ++wx) {
                double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
                for (int y = 0; y < win; ++y) {
                    for (int x = 0; x < win; ++x) {
                        const double w = g[static_cast<size_t>(y) * win + x];
                        const double xv = a.at(wx + x, wy + y, ch);
                        const double yv = b.at(wx + x, wy + y, ch);
                        mx += w * xv;
                        my += w * yv;
                        mxx += w * xv * xv;
                        myy += w * yv * yv;
                        mxy += w * xv * yv;
                    }
                }
                const double sx = mxx - mx * mx;
                const double sy = myy - my * my;
                const double sxy = mxy - mx * my;
                total += ((2 * mx * my + c1) * (2 * sxy + c2)) /
                         ((mx * mx + my * my + c1) * (sx + sy + c2));
                ++count;
            }
        }
    }
    return total / count;
}

// Textbook Adam, one parameter vector.
struct AdamRef {
    std::vector<double> m, v;
    long long t = 0;
    void step(std::vector<double>& p, const std::vector<double>& g, double lr,
              double b1 = 0.9, double b2 = 0.999, double eps = 1e-8) {
        if (m.empty()) {
            m.assign(p.size(), 0.0);
            v.assign(p.size(), 0.0);
        }
        ++t;
        for (size_t i = 0; i < p.size(); ++i) {
            m[i] = b1 * m[i] + (1 - b1) * g[i];
            v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
            const double mh = m[i] / (1 - std::pow(b1, t));
            const double vh = v[i] / (1 - std::pow(b2, t));
            p[i] -= lr * mh / (std::sqrt(vh) + eps);
        }
    }
};

// Greedy farthest-point replay under 1 - |dot|.
inline std::vector<int> fps_ref(const std::vector<UnitQuaternion>& q, int n) {
    const auto dist = [&](int i, int j) { return quat_distance(q[i], q[j]); };
    std::vector<int> picked;
    int seed = 0;
    double best = -1;
    for (size_t i = 0; i < q.size(); ++i) {
        double mean = 0;
        for (size_t j = 0; j < q.size(); ++j) mean += dist((int)i, (int)j);
        mean /= q.size();
        if (mean > best) {
            best = mean;
            seed = static_cast<int>(i);
        }
    }
    picked.push_back(seed);
    while (static_cast<int>(picked.size()) < n) {
        int arg = -1;
        double far = -1;
        for (size_t i = 0; i < q.size(); ++i) {
            if (std::find(picked.begin(), picked.end(), (int)i) != picked.end()) continue;
            double mind = 1e300;
            for (int p : picked) mind = std::min(mind, dist((int)i, p));
            if (mind > far) {
                far = mind;
                arg = static_cast<int>(i);
            }
        }
        picked.push_back(arg);
    }
    return picked;
}

// Adjusted Rand index between two labelings.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    const size_t n = a.size();
    std::map<std::pair<int, int>, long long> cont;
    std::map<int, long long> ra, rb;
    for (size_t i = 0; i < n; ++i) {
        ++cont[{a[i], b[i]}];
        ++ra[a[i]];
        ++rb[b[i]];
    }
    const auto c2 = [](long long k) { return k * (k - 1) / 2.0; };
    double sum_ij = 0, sum_a = 0, sum_b = 0;
    for (const auto& [k, v] : cont) sum_ij += c2(v);
    for (const auto& [k, v] : ra) sum_a += c2(v);
    for (const auto& [k, v] : rb) sum_b += c2(v);
    const double total = c2(static_cast<long long>(n));
    const double expected = sum_a * sum_b / total;
    const double maxi = 0.5 * (sum_a + sum_b);
    if (maxi == expected) return 1.0;
    return (sum_ij - expected) / (maxi - expected);
}

// Binary mask of a triangle mesh under a pinhole camera (flat 2D fill by
// point-in-triangle tests), for silhouette-coverage checks.
inline std::vector<std::uint8_t> mesh_mask_ref(const std::vector<Vec3>& verts,
                                               const std::vector<std::array<int, 3>>& faces,
                                               const Camera& cam) {
    std::vector<std::uint8_t> mask(static_cast<size_t>(cam.width) * cam.height, 0);
    for (const auto& f : faces) {
        Vec2 p[3];
        bool ok = true;
        for (int k = 0; k < 3; ++k) {
            const Vec3 xc = cam.R * verts[f[k]] + cam.t;
            if (xc.z() <= 0.01) {
                ok = false;
                break;
            }
            p[k] = Vec2(cam.fx * xc.x() / xc.z() + cam.cx,
                        cam.fy * xc.y() / xc.z() + cam.cy);
        }
        if (!ok) continue;
        const double minx = std::min({p[0].x(), p[1].x(), p[2].x()});
        const double maxx = std::max({p[0].x(), p[1].x(), p[2].x()});
        const double miny = std::min({p[0].y(), p[1].y(), p[2].y()});
        const double maxy = std::max({p[0].y(), p[1].y(), p[2].y()});
        for (int y = std::max(0, (int)std::floor(miny)); y <= std::min(cam.height - 1, (int)std::ceil(maxy)); ++y) {
            for (int x = std::max(0, (int)std::floor(minx)); x <= std::min(cam.width - 1, (int)std::ceil(maxx)); ++x) {
                const Vec2 q(x + 0.5, y + 0.5);
                const auto cross = [](const Vec2& o, const Vec2& u, const Vec2& v) {
                    return (u.x() - o.x()) * (v.y() - o.y()) - (u.y() - o.y()) * (v.x() - o.x());
                };
                const double d0 = cross(p[0], p[1], q);
                const double d1 = cross(p[1], p[2], q);
                const double d2 = cross(p[2], p[0], q);
                const bool neg = (d0 < 0) || (d1 < 0) || (d2 < 0);
                const bool pos = (d0 > 0) || (d1 > 0) || (d2 > 0);
                if (!(neg && pos)) mask[static_cast<size_t>(y) * cam.width + x] = 1;
            }
        }
    }
    return mask;
}

}  // namespace ctav::oracle
