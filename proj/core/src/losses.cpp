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
#include "ctav/losses.hpp"

#include <cmath>

namespace ctav {

namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;
constexpr double kSsimSigma = 1.5;
constexpr int kSsimWindow = 11;

std::vector<double> gaussian_kernel(int size, double sigma) {
    std::vector<double> k(size);
    const int half = size / 2;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = i - half;
        k[i] = std::exp(-0.5 * d * d / (sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

// One channel of an interleaved image as a plain array.
std::vector<double> extract_channel(const Image& img, int c) {
    std::vector<double> out(img.pixel_count());
    for (size_t p = 0; p < out.size(); ++p) out[p] = img.data[p * 3 + c];
    return out;
}

// Valid-region separable correlation: out is (W - win + 1) x (H - win + 1).
struct ValidConv {
    int w = 0, h = 0;  // output dims
    std::vector<double> data;
    double at(int x, int y) const { return data[static_cast<size_t>(y) * w + x]; }
};

ValidConv sepconv_valid(const std::vector<double>& src, int W, int H,
                        const std::vector<double>& k) {
    const int win = static_cast<int>(k.size());
    ValidConv out;
    out.w = W - win + 1;
    out.h = H - win + 1;
    // Rows pass: horizontal window, full height.
    std::vector<double> tmp(static_cast<size_t>(out.w) * H);
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < out.w; ++x) {
            double s = 0.0;
            for (int i = 0; i < win; ++i) s += k[i] * src[static_cast<size_t>(y) * W + x + i];
            tmp[static_cast<size_t>(y) * out.w + x] = s;
        }
    }
    out.data.resize(static_cast<size_t>(out.w) * out.h);
    for (int y = 0; y < out.h; ++y) {
        for (int x = 0; x < out.w; ++x) {
            double s = 0.0;
            for (int i = 0; i < win; ++i) s += k[i] * tmp[static_cast<size_t>(y + i) * out.w + x];
            out.data[static_cast<size_t>(y) * out.w + x] = s;
        }
    }
    return out;
}

// Transpose of sepconv_valid: scatters window-center values back to pixels.
void sepconv_scatter(const ValidConv& centers, int W, int H,
                     const std::vector<double>& k, std::vector<double>& dst) {
    const int win = static_cast<int>(k.size());
    std::vector<double> tmp(static_cast<size_t>(centers.w) * H, 0.0);
    for (int y = 0; y < centers.h; ++y) {
        for (int x = 0; x < centers.w; ++x) {
            const double v = centers.at(x, y);
            if (v == 0.0) continue;
            for (int i = 0; i < win; ++i) tmp[static_cast<size_t>(y + i) * centers.w + x] += k[i] * v;
        }
    }
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < centers.w; ++x) {
            const double v = tmp[static_cast<size_t>(y) * centers.w + x];
            if (v == 0.0) continue;
            for (int i = 0; i < win; ++i) dst[static_cast<size_t>(y) * W + x + i] += k[i] * v;
        }
    }
}

}  // namespace

void LossWeights::validate() const {
    if (lambda < 0.0 || lambda > 1.0) throw ConfigInvalid("lambda must be in [0,1]");
    if (lambda_pos < 0 || lambda_scale < 0 || lambda_op < 0 || tau < 0) {
        throw ConfigInvalid("loss weights must be nonnegative");
    }
}

double ssim(const Image& a, const Image& b, Image* grad_a) {
    if (a.width != b.width || a.height != b.height) {
        throw DimensionMismatch("ssim image sizes");
    }
    const int W = a.width, H = a.height;
    int win = std::min({kSsimWindow, W, H});
    if (win % 2 == 0) --win;
    if (win < 1) throw DimensionMismatch("image too small for ssim");
    const std::vector<double> kernel = gaussian_kernel(win, kSsimSigma);

    const int cw = W - win + 1, ch = H - win + 1;
    const double n_windows = static_cast<double>(cw) * ch * 3;
    double total = 0.0;

    for (int c = 0; c < 3; ++c) {
        const std::vector<double> x = extract_channel(a, c);
        const std::vector<double> y = extract_channel(b, c);
        std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
        for (size_t i = 0; i < x.size(); ++i) {
            xx[i] = x[i] * x[i];
            yy[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        const ValidConv mu_x = sepconv_valid(x, W, H, kernel);
        const ValidConv mu_y = sepconv_valid(y, W, H, kernel);
        const ValidConv e_xx = sepconv_valid(xx, W, H, kernel);
        const ValidConv e_yy = sepconv_valid(yy, W, H, kernel);
        const ValidConv e_xy = sepconv_valid(xy, W, H, kernel);

        ValidConv mp, mq, mr;  // gradient scatter maps
        if (grad_a) {
            mp.w = mq.w = mr.w = cw;
            mp.h = mq.h = mr.h = ch;
            mp.data.assign(static_cast<size_t>(cw) * ch, 0.0);
            mq.data.assign(static_cast<size_t>(cw) * ch, 0.0);
            mr.data.assign(static_cast<size_t>(cw) * ch, 0.0);
        }

        for (int wy = 0; wy < ch; ++wy) {
            for (int wx = 0; wx < cw; ++wx) {
                const size_t idx = static_cast<size_t>(wy) * cw + wx;
                const double ux = mu_x.data[idx], uy = mu_y.data[idx];
                const double sx = e_xx.data[idx] - ux * ux;
                const double sy = e_yy.data[idx] - uy * uy;
                const double sxy = e_xy.data[idx] - ux * uy;
                const double a1 = 2.0 * ux * uy + kC1;
                const double a2 = 2.0 * sxy + kC2;
                const double b1 = ux * ux + uy * uy + kC1;
                const double b2 = sx + sy + kC2;
                const double s = (a1 * a2) / (b1 * b2);
                total += s;
                if (grad_a) {
                    // dS/dx_i = g_i [P + Q x_i + R y_i] with:
                    const double q = -2.0 * s / b2;
                    const double r = 2.0 * s / a2;
                    const double p = s * (2.0 * uy / a1 - 2.0 * ux / b1) - q * ux - r * uy;
                    mp.data[idx] = p / n_windows;
                    mq.data[idx] = q / n_windows;
                    mr.data[idx] = r / n_windows;
                }
            }
        }

        if (grad_a) {
            std::vector<double> gp(x.size(), 0.0), gq(x.size(), 0.0), gr(x.size(), 0.0);
            sepconv_scatter(mp, W, H, kernel, gp);
            sepconv_scatter(mq, W, H, kernel, gq);
            sepconv_scatter(mr, W, H, kernel, gr);
            for (size_t i = 0; i < x.size(); ++i) {
                grad_a->data[i * 3 + c] += gp[i] + gq[i] * x[i] + gr[i] * y[i];
            }
        }
    }
    return total / n_windows;
}

ImageLossResult loss_image(const Image& rendered, const Image& target, double lambda,
                           Image* grad) {
    if (rendered.width != target.width || rendered.height != target.height) {
        throw DimensionMismatch("loss_image sizes");
    }
    if (lambda < 0.0 || lambda > 1.0) throw ConfigInvalid("lambda must be in [0,1]");
    if (grad) {
        *grad = Image(rendered.width, rendered.height);
    }

    ImageLossResult res;
    const double n = static_cast<double>(rendered.data.size());
    double l1 = 0.0;
    for (size_t i = 0; i < rendered.data.size(); ++i) {
        const double d = rendered.data[i] - target.data[i];
        l1 += std::abs(d);
        if (grad) {
            grad->data[i] = (1.0 - lambda) * (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)) / n;
        }
    }
    res.l1 = l1 / n;

    Image ssim_grad;
    double s;
    if (grad && lambda > 0.0) {
        ssim_grad = Image(rendered.width, rendered.height);
        s = ssim(rendered, target, &ssim_grad);
        for (size_t i = 0; i < grad->data.size(); ++i) {
            grad->data[i] += lambda * (-0.5) * ssim_grad.data[i];
        }
    } else {
        s = ssim(rendered, target);
    }
    res.dssim = 0.5 * (1.0 - s);
    res.value = (1.0 - lambda) * res.l1 + lambda * res.dssim;
    return res;
}

GeomLossResult loss_geom(const SplatSet& splats, const LossWeights& weights,
                         SplatGrads* grads) {
    GeomLossResult res;
    const int N = splats.count();
    if (N == 0) return res;
    for (int i = 0; i < N; ++i) {
        const Vec3 mu = splats.mu(i);
        const double norm = mu.norm();
        if (norm > weights.eps_pos) {
            res.pos_term += norm - weights.eps_pos;
            if (grads && norm > 0.0) {
                const Vec3 g = (weights.lambda_pos / N) * (mu / norm);
                grads->mu_local[3 * i] += g.x();
                grads->mu_local[3 * i + 1] += g.y();
                grads->mu_local[3 * i + 2] += g.z();
            }
        }
        // Hinge on the largest local scale component.
        int arg = 0;
        double smax = std::exp(splats.log_scale[3 * i]);
        for (int a = 1; a < 3; ++a) {
            const double s = std::exp(splats.log_scale[3 * i + a]);
            if (s > smax) {
                smax = s;
                arg = a;
            }
        }
        if (smax > weights.eps_scale) {
            res.scale_term += smax - weights.eps_scale;
            if (grads) {
                grads->log_scale[3 * i + arg] += (weights.lambda_scale / N) * smax;
            }
        }
    }
    res.pos_term /= N;
    res.scale_term /= N;
    res.value = weights.lambda_pos * res.pos_term + weights.lambda_scale * res.scale_term;
    return res;
}

double loss_opacity_penalty(std::span<const double> delta_alpha,
                            std::span<const int> splat_face,
                            std::span<const Vec3> face_translation,
                            const LossWeights& weights,
                            std::span<double> grad_delta_alpha) {
    if (delta_alpha.size() != splat_face.size()) {
        throw DimensionMismatch("opacity penalty spans");
    }
    if (!grad_delta_alpha.empty() && grad_delta_alpha.size() != delta_alpha.size()) {
        throw DimensionMismatch("opacity penalty gradient span");
    }
    const size_t N = delta_alpha.size();
    if (N == 0) return 0.0;
    double sum = 0.0;
    for (size_t i = 0; i < N; ++i) {
        const int f = splat_face[i];
        if (f < 0 || static_cast<size_t>(f) >= face_translation.size()) {
            throw InvalidTriangleId("opacity penalty face id");
        }
        const bool is_static = face_translation[f].norm() <= weights.tau;
        if (!is_static) continue;
        sum += std::abs(delta_alpha[i]);
        if (!grad_delta_alpha.empty() && delta_alpha[i] != 0.0) {
            grad_delta_alpha[i] +=
                weights.lambda_op * (delta_alpha[i] > 0 ? 1.0 : -1.0) / static_cast<double>(N);
        }
    }
    return weights.lambda_op * sum / static_cast<double>(N);
}

}  // namespace ctav
