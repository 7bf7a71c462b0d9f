// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
// Per-pixel arithmetic shared by the reference and fast rasterizers.
//
#pragma once

#include "gscache/raster.hpp"

#include <cmath>
#include <tuple>

namespace gscache::detail {

inline float mahalanobis_sq(const Sym2f &conic, float dx, float dy) {
    return conic.xx * dx * dx + 2.0f * conic.xy * dx * dy + conic.yy * dy * dy;
}

struct PixelState {
    float r = 0.0f, g = 0.0f, b = 0.0f;
    float transmittance = 1.0f;
    float weight_sum = 0.0f;
    bool done = false;
};

/// Front-to-back blend of one splat into one pixel (pixel centre px, py).
inline void blend(PixelState &p, const Splat2D &s, float px, float py) {
    const float dx = px - s.center.x;
    const float dy = py - s.center.y;
    const float q = mahalanobis_sq(s.conic, dx, dy);
    if (!(q <= s.radius * s.radius))
        return;
    const float a = s.opacity * std::exp(-0.5f * q);
    if (a < kBlendThreshold)
        return;
    const float w = p.transmittance * a;
    p.r += w * s.color.x;
    p.g += w * s.color.y;
    p.b += w * s.color.z;
    p.weight_sum += w;
    p.transmittance *= 1.0f - a;
    if (p.transmittance < kTransmittanceFloor)
        p.done = true;
}

/// Strict total order on splats: depth first, then content, then index.
/// Permuting the input batch therefore cannot change any tile list.
inline bool splat_before(const Splat2D &a, std::uint32_t ia, const Splat2D &b, std::uint32_t ib) {
    if (a.depth != b.depth)
        return a.depth < b.depth;
    const auto key = [](const Splat2D &s) {
        return std::make_tuple(s.depth, s.center.x, s.center.y, s.opacity, s.color.x, s.color.y,
                               s.color.z, s.cov.xx, s.cov.xy, s.cov.yy);
    };
    const auto ka = key(a);
    const auto kb = key(b);
    if (ka != kb)
        return ka < kb;
    return ia < ib;
}

inline void write_pixel(Image &img, int x, int y, const PixelState &p, const Vec3f &bg) {
    const std::size_t i = 3 * (std::size_t(y) * img.width + x);
    img.rgb[i] = p.r + p.transmittance * bg.x;
    img.rgb[i + 1] = p.g + p.transmittance * bg.y;
    img.rgb[i + 2] = p.b + p.transmittance * bg.z;
}

inline void track_conservation(RasterStats &st, const PixelState &p) {
    st.max_weight_sum = std::max(st.max_weight_sum, p.weight_sum);
    st.min_transmittance = std::min(st.min_transmittance, p.transmittance);
    st.max_transmittance = std::max(st.max_transmittance, p.transmittance);
    if (!(p.weight_sum <= 1.0f) || !(p.transmittance >= 0.0f && p.transmittance <= 1.0f))
        st.conservation_ok = false;
}

} // namespace gscache::detail
