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

#include <stdexcept>
#include <string>

namespace ctav {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define CTAV_DEFINE_ERROR(Name)                                          \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

CTAV_DEFINE_ERROR(DegenerateTriangle);
CTAV_DEFINE_ERROR(DimensionMismatch);
CTAV_DEFINE_ERROR(DegenerateWeights);
CTAV_DEFINE_ERROR(InsufficientSamples);
CTAV_DEFINE_ERROR(TopologyMismatch);
CTAV_DEFINE_ERROR(TooFewFrames);
CTAV_DEFINE_ERROR(EmptyCluster);
CTAV_DEFINE_ERROR(EmptySplit);
CTAV_DEFINE_ERROR(ConfigInvalid);
CTAV_DEFINE_ERROR(InvalidTriangleId);
CTAV_DEFINE_ERROR(IoFailure);
CTAV_DEFINE_ERROR(CorruptFile);
CTAV_DEFINE_ERROR(VersionMismatch);

#undef CTAV_DEFINE_ERROR

}  // namespace ctav
