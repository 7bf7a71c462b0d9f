// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
// Scalar pieces shared by both decoder paths. Anything that feeds a float
// result lives here so the two paths evaluate it with the same operations in
// the same order.
//
#pragma once

#include "gscache/decoder.hpp"
#include "gscache/errors.hpp"

#include <cmath>
#include <string>

namespace gscache::detail {

inline float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

inline Vec3f view_direction(const Vec3f &position, const Vec3f &viewpoint) {
    const Vec3f d = position - viewpoint;
    const float n = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
    if (n == 0.0f)
        return {0.0f, 0.0f, 0.0f};
    return {d.x / n, d.y / n, d.z / n};
}

/// bias + sum_c w[c] * x[c], accumulated left to right.
inline float dense_row(const float *w, const float *x, int n, float bias) {
    float acc = bias;
    for (int c = 0; c < n; ++c)
        acc += w[c] * x[c];
    return acc;
}

struct DecodedGaussian {
    Vec3f mean;
    Quatf rotation;
    Vec3f scale;
    Vec3f color;
    float opacity;
};

/// Turns one head (kHeadWidth raw outputs) into Gaussian parameters. The
/// caller has already established that tanh(head[0]) > 0.
inline DecodedGaussian emit_gaussian(const float *head, float alpha, const Vec3f &position,
                                     const float *offset, const Vec3f &anchor_scale) {
    DecodedGaussian g;
    g.opacity = alpha;
    g.color = {sigmoid(head[kHeadColor]), sigmoid(head[kHeadColor + 1]),
               sigmoid(head[kHeadColor + 2])};
    const float *q = head + kHeadRotation;
    const float qn = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    g.rotation = qn > 0.0f ? Quatf{q[0] / qn, q[1] / qn, q[2] / qn, q[3] / qn} : Quatf{};
    g.scale = {sigmoid(head[kHeadScale]) * anchor_scale.x, sigmoid(head[kHeadScale + 1]) * anchor_scale.y,
               sigmoid(head[kHeadScale + 2]) * anchor_scale.z};
    g.mean = {position.x + offset[0] * anchor_scale.x, position.y + offset[1] * anchor_scale.y,
              position.z + offset[2] * anchor_scale.z};
    return g;
}

inline void check_ids(const SceneModel &scene, std::span<const std::uint32_t> ids) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= scene.size())
            throw InvalidArgument("decode: anchor id " + std::to_string(ids[i]) + " out of range");
        if (i > 0 && ids[i] <= ids[i - 1])
            throw InvalidArgument("decode: anchor ids must be strictly ascending");
    }
}

} // namespace gscache::detail
