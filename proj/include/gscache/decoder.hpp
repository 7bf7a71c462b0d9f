// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
// Anchor filtering (frustum + LoD) and Gaussian derivation. The decoder has
// a serial reference path and an OpenMP fast path; both produce bitwise
// identical batches.
//
#pragma once

#include "gscache/math.hpp"
#include "gscache/scene.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gscache {

/// Anchors selected for one view, ascending by id. `levels[i]` is the LoD
/// cutoff the filter evaluated for `ids[i]`; the cache keys entries on it.
struct AnchorIndexSet {
    std::vector<std::uint32_t> ids;
    std::vector<std::uint8_t> levels;
    int cutoff = 0; ///< highest cutoff level selected this view

    std::size_t size() const { return ids.size(); }
    bool empty() const { return ids.empty(); }
    bool operator==(const AnchorIndexSet &) const = default;
};

/// Decoded neural Gaussians, structure-of-arrays.
struct GaussianBatch {
    std::vector<Vec3f> mean;
    std::vector<Quatf> rotation;
    std::vector<Vec3f> scale;
    std::vector<Vec3f> color;
    std::vector<float> opacity;
    std::vector<std::uint32_t> source_anchor;

    std::size_t size() const { return mean.size(); }
    bool empty() const { return mean.empty(); }
    void clear();
    void reserve(std::size_t n);
    void resize(std::size_t n);
    void push_back(const Vec3f &mu, const Quatf &rot, const Vec3f &s, const Vec3f &c, float alpha,
                   std::uint32_t anchor);
    /// Appends rows [begin, end) of `src`.
    void append(const GaussianBatch &src, std::size_t begin, std::size_t end);
    void append(const GaussianBatch &src) { append(src, 0, src.size()); }
    std::size_t memory_bytes() const;
    bool operator==(const GaussianBatch &) const = default;
};

/// Returns a description of the first violated batch invariant: unit
/// rotations (1e-5), positive scales, opacity in (0, 1], finite values,
/// positive-definite covariance.
std::optional<std::string> validate_batch(const GaussianBatch &batch);

/// LoD cutoff for an anchor at distance `d`:
/// clamp(floor(log2(d0 / d)) + L - 1, 0, L - 1); d <= 0 selects all levels.
int lod_cutoff(double d, double d0, int lod_levels);

/// True if `p` lies inside the camera frustum grown by `margin` (signed
/// distance to every bounding plane <= margin).
bool in_frustum(const Camera &camera, const Vec3d &p, double margin);

/// Anchors whose centre is inside the frustum (guarded by the anchor's
/// extent) and whose lod_level <= lod_cutoff(distance).
AnchorIndexSet filter_anchors(const SceneModel &scene, const Camera &camera);

/// Reference decoder. Mirrors an unfused tensor pipeline: the concatenated
/// input, hidden and output matrices are materialized for the whole batch,
/// then split into heads and masked. `ids` must be strictly ascending.
GaussianBatch decode_anchors(const SceneModel &scene, std::span<const std::uint32_t> ids,
                             const Vec3d &viewpoint);

/// Fused decoder: per anchor, both layers run back to back without
/// materializing batch intermediates; the opacity rows are evaluated first
/// and the remaining head rows only for unmasked Gaussians; anchors are
/// processed in parallel and compacted with a prefix sum.
GaussianBatch decode_anchors_fast(const SceneModel &scene, std::span<const std::uint32_t> ids,
                                  const Vec3d &viewpoint);

/// Sigma = R S S^T R^T for a unit quaternion and positive scale.
template <typename T> Mat3<T> build_covariance(const Quat<T> &rotation, const Vec3<T> &scale) {
    const Mat3<T> r = rotation.to_matrix();
    Mat3<T> m;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            m(i, k) = r(i, k) * scale[static_cast<std::size_t>(k)];
    Mat3<T> sigma;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            sigma(i, j) = m(i, 0) * m(j, 0) + m(i, 1) * m(j, 1) + m(i, 2) * m(j, 2);
    return sigma;
}

/// exp(-(x - mu)^T Sigma^-1 (x - mu) / 2). Throws NumericDomainError when
/// Sigma is singular.
double gaussian_weight(const Vec3d &x, const Vec3d &mu, const Mat3d &sigma);

} // namespace gscache
