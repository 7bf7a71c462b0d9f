// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "gscache/raster.hpp"
#include "gscache/scene.hpp"

#include <algorithm>
#include <cmath>

namespace gscache::test {

inline SceneModel small_scene(std::uint64_t seed, std::uint32_t n = 1000) {
    SceneParams p;
    p.seed = seed;
    p.n_anchors = n;
    return generate_synthetic_scene(p);
}

inline OrbitParams small_orbit(std::size_t frames, int px = 64) {
    OrbitParams o;
    o.n_frames = frames;
    o.width = px;
    o.height = px;
    o.sweep = 2 * kPi * static_cast<double>(frames) / 200.0;
    return o;
}

inline float max_abs_diff(const Image &a, const Image &b) {
    float m = 0.0f;
    for (std::size_t i = 0; i < a.rgb.size(); ++i)
        m = std::max(m, std::abs(a.rgb[i] - b.rgb[i]));
    return m;
}

inline bool near_vec(const Vec3d &a, const Vec3d &b, double tol) {
    return std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol && std::abs(a.z - b.z) <= tol;
}

} // namespace gscache::test
