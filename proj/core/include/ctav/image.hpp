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

#include <string>
#include <vector>

#include "ctav/geometry.hpp"

namespace ctav {

/// RGB image, row-major, interleaved channels, values in [0,1].
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> data;  // 3 * width * height

    Image() = default;
    Image(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0.0) {}

    double& at(int x, int y, int c) {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    double at(int x, int y, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    Vec3 pixel(int x, int y) const {
        return Vec3(at(x, y, 0), at(x, y, 1), at(x, y, 2));
    }
    void set_pixel(int x, int y, const Vec3& rgb) {
        at(x, y, 0) = rgb.x();
        at(x, y, 1) = rgb.y();
        at(x, y, 2) = rgb.z();
    }
    void fill(const Vec3& rgb);
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

/// Uncompressed float raster: magic "CTIM", u32 version=1, u32 width,
/// u32 height, then width*height*3 little-endian fp32 (RGB interleaved,
/// row-major).
void write_cti(const Image& img, const std::string& path);
Image read_cti(const std::string& path);

/// 8-bit binary PPM (P6) for viewing; values clamped to [0,1] then scaled.
void write_ppm(const Image& img, const std::string& path);

}  // namespace ctav
