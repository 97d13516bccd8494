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

#include <cmath>
#include <random>

#include "ctav/geometry.hpp"

namespace ctav::test {

inline double rel_err(double analytic, double reference) {
    const double scale = std::max({std::abs(analytic), std::abs(reference), 1e-8});
    return std::abs(analytic - reference) / scale;
}

/// Central difference of f() w.r.t. *param.
template <class F>
double central_diff(F&& f, double* param, double h) {
    const double orig = *param;
    *param = orig + h;
    const double fp = f();
    *param = orig - h;
    const double fm = f();
    *param = orig;
    return (fp - fm) / (2.0 * h);
}

inline Vec3 random_unit_vec3(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec3 v(g(rng), g(rng), g(rng));
    while (v.norm() < 1e-6) v = Vec3(g(rng), g(rng), g(rng));
    return v.normalized();
}

inline UnitQuaternion random_quat(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    return UnitQuaternion::normalized(g(rng), g(rng), g(rng), g(rng));
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
    return random_quat(rng).to_rotation_matrix();
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace ctav::test
