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
#include <string>
#include <vector>

#include "ctav/model.hpp"

namespace ctav {

/// Grid tensors may be quantized to half precision; everything else stays
/// fp32.
enum class SavePrecision : std::uint8_t { Fp32 = 0, Fp16Grids = 1 };

struct StorageSection {
    std::string name;
    std::uint64_t bytes = 0;          // full section length in the file
    std::uint64_t payload_bytes = 0;  // tensor data only (grids / weights)
};

struct StorageReport {
    std::vector<StorageSection> sections;
    std::uint64_t total_bytes = 0;   // sum of section lengths
    std::uint64_t header_bytes = 0;  // magic + section table
    std::uint64_t file_bytes = 0;    // header_bytes + total_bytes

    const StorageSection* find(const std::string& name) const;
};

/// Single-file container: magic "CTAV1", little-endian, a section table of
/// (name, offset, length), one section per component. Returns the exact
/// byte accounting of what was written.
StorageReport save_model(const AvatarModel& model, const std::string& path,
                         SavePrecision precision = SavePrecision::Fp32);

/// Throws VersionMismatch on a foreign magic, CorruptFile on truncation or
/// inconsistent payloads. The rig is rebuilt from its stored recipe.
AvatarModel load_model(const std::string& path);

/// Byte accounting of an existing container without loading the tensors.
StorageReport inspect_model(const std::string& path);

/// Plain-text table of a storage report.
std::string format_report(const StorageReport& report);

/// IEEE half conversions used for fp16 grid storage.
std::uint16_t float_to_half(float value);
float half_to_float(std::uint16_t h);

}  // namespace ctav
