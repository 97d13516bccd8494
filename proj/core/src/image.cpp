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
#include "ctav/image.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "ctav/errors.hpp"

namespace ctav {

namespace {

constexpr char kMagic[4] = {'C', 'T', 'I', 'M'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw CorruptFile("unexpected end of image file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void Image::fill(const Vec3& rgb) {
    for (size_t i = 0; i < pixel_count(); ++i) {
        data[i * 3 + 0] = rgb.x();
        data[i * 3 + 1] = rgb.y();
        data[i * 3 + 2] = rgb.z();
    }
}

void write_cti(const Image& img, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoFailure("cannot open for writing: " + path);
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    write_u32(os, static_cast<std::uint32_t>(img.width));
    write_u32(os, static_cast<std::uint32_t>(img.height));
    std::vector<float> buf(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i) buf[i] = static_cast<float>(img.data[i]);
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!os) throw IoFailure("failed writing image: " + path);
}

Image read_cti(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoFailure("cannot open image: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw VersionMismatch("not a CTIM image: " + path);
    }
    const std::uint32_t version = read_u32(is);
    if (version != kVersion) throw VersionMismatch("unsupported image version");
    const std::uint32_t w = read_u32(is);
    const std::uint32_t h = read_u32(is);
    if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16)) {
        throw CorruptFile("implausible image dimensions");
    }
    Image img(static_cast<int>(w), static_cast<int>(h));
    std::vector<float> buf(img.data.size());
    is.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!is) throw CorruptFile("truncated image payload: " + path);
    for (size_t i = 0; i < buf.size(); ++i) img.data[i] = static_cast<double>(buf[i]);
    return img;
}

void write_ppm(const Image& img, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoFailure("cannot open for writing: " + path);
    os << "P6\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> buf(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i) {
        const double v = std::clamp(img.data[i], 0.0, 1.0);
        buf[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size()));
    if (!os) throw IoFailure("failed writing image: " + path);
}

}  // namespace ctav
