// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#include "raster_detail.hpp"

#include <algorithm>
#include <array>

#include <omp.h>

namespace gscache {

namespace {

/// Rows a splat can touch, padded so float rounding in the per-pixel test
/// never admits a pixel outside.
struct RowRange {
    int y0, y1;
};

RowRange row_range(const Splat2D &s) {
    const double hy = double(s.radius) * std::sqrt(double(s.cov.yy)) * (1.0 + 1e-3) + 1e-2;
    const double lo = -1e9, hi = 1e9;
    return {static_cast<int>(std::clamp(std::ceil(s.center.y - hy - 0.5), lo, hi)),
            static_cast<int>(std::clamp(std::floor(s.center.y + hy - 0.5), lo, hi))};
}

/// Columns of row `y` inside the support ellipse, widened by one pixel on
/// each side. Empty (x1 < x0) when the row misses the ellipse.
void row_span(const Splat2D &s, int y, int &x0, int &x1) {
    const double a = s.conic.xx;
    const double dy = double(y) + 0.5 - double(s.center.y);
    const double b = double(s.conic.xy) * dy;
    const double c = double(s.conic.yy) * dy * dy - double(s.radius) * double(s.radius) * (1.0 + 1e-3);
    const double disc = b * b - a * c;
    if (!(a > 0.0) || disc < 0.0) {
        x0 = 1;
        x1 = 0;
        return;
    }
    const double root = std::sqrt(disc);
    const double lo = double(s.center.x) + (-b - root) / a - 0.5;
    const double hi = double(s.center.x) + (-b + root) / a - 0.5;
    x0 = static_cast<int>(std::clamp(std::ceil(lo) - 1.0, -1e9, 1e9));
    x1 = static_cast<int>(std::clamp(std::floor(hi) + 1.0, -1e9, 1e9));
}

std::size_t emit_tiles(const Splat2D &s, std::uint32_t index, int width, int height, int tiles_x,
                       bool exact, std::uint32_t *tile_out, std::uint32_t *splat_out) {
    const TileRange tr = tile_bounds(s, width, height);
    std::size_t n = 0;
    for (int ty = tr.y0; ty <= tr.y1; ++ty)
        for (int tx = tr.x0; tx <= tr.x1; ++tx) {
            if (exact && !tile_intersects(s, tx, ty, width, height))
                continue;
            if (tile_out) {
                tile_out[n] = static_cast<std::uint32_t>(ty * tiles_x + tx);
                splat_out[n] = index;
            }
            ++n;
        }
    return n;
}

} // namespace

Image rasterize_fast(const GaussianBatch &batch, const Camera &camera, const RasterOptions &options,
                     RasterStats *stats) {
    RasterOptions opts = options;
    opts.parallel = true;
    RasterStats st;
    const std::vector<Splat2D> splats = prepare_splats(batch, camera, opts, &st);
    const int width = camera.width;
    const int height = camera.height;
    const int tiles_x = (width + kTileSize - 1) / kTileSize;
    const int tiles_y = (height + kTileSize - 1) / kTileSize;
    const auto n_tiles = static_cast<std::size_t>(tiles_x) * tiles_y;
    const auto n = static_cast<std::ptrdiff_t>(splats.size());

    // Global front-to-back order; pairs are emitted in this order and the
    // stable counting sort by tile keeps every tile list sorted.
    std::vector<std::uint32_t> order(static_cast<std::size_t>(n));
    for (std::ptrdiff_t i = 0; i < n; ++i)
        order[i] = static_cast<std::uint32_t>(i);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return detail::splat_before(splats[a], a, splats[b], b);
    });

    // Pass 1: tiles per splat. Pass 2: (tile, splat) pairs at prefix offsets.
    std::vector<std::size_t> offset(static_cast<std::size_t>(n) + 1, 0);
#pragma omp parallel for schedule(dynamic, 256)
    for (std::ptrdiff_t r = 0; r < n; ++r)
        offset[r + 1] = emit_tiles(splats[order[r]], order[r], width, height, tiles_x,
                                   opts.exact_tiles, nullptr, nullptr);
    for (std::ptrdiff_t r = 0; r < n; ++r)
        offset[r + 1] += offset[r];
    const std::size_t pairs = offset[static_cast<std::size_t>(n)];
    std::vector<std::uint32_t> pair_tile(pairs), pair_splat(pairs);
#pragma omp parallel for schedule(dynamic, 256)
    for (std::ptrdiff_t r = 0; r < n; ++r)
        emit_tiles(splats[order[r]], order[r], width, height, tiles_x, opts.exact_tiles,
                   pair_tile.data() + offset[r], pair_splat.data() + offset[r]);
    st.tile_pairs = pairs;

    std::vector<std::size_t> tile_start(n_tiles + 1, 0);
    for (std::uint32_t t : pair_tile)
        ++tile_start[t + 1];
    for (std::size_t t = 0; t < n_tiles; ++t)
        tile_start[t + 1] += tile_start[t];
    std::vector<std::uint32_t> sorted(pairs);
    {
        std::vector<std::size_t> cursor(tile_start.begin(), tile_start.end() - 1);
        for (std::size_t p = 0; p < pairs; ++p)
            sorted[cursor[pair_tile[p]]++] = pair_splat[p];
    }

    std::vector<RowRange> rows(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        rows[i] = row_range(splats[i]);

    Image img(width, height);
    const auto tiles = static_cast<std::ptrdiff_t>(n_tiles);
#pragma omp parallel
    {
        RasterStats local;
        std::array<detail::PixelState, kTileSize * kTileSize> px;
        std::array<int, kTileSize> row_live;
#pragma omp for schedule(dynamic, 1)
        for (std::ptrdiff_t t = 0; t < tiles; ++t) {
            const int tx = static_cast<int>(t % tiles_x);
            const int ty = static_cast<int>(t / tiles_x);
            const int bx = tx * kTileSize, by = ty * kTileSize;
            const int ex = std::min(bx + kTileSize, width), ey = std::min(by + kTileSize, height);
            px.fill(detail::PixelState{});
            row_live.fill(ex - bx);
            int live = (ex - bx) * (ey - by);

            const std::uint32_t *end = sorted.data() + tile_start[t + 1];
            for (const std::uint32_t *it = sorted.data() + tile_start[t]; it != end && live > 0;
                 ++it) {
                const Splat2D &s = splats[*it];
                const int y0 = std::max(rows[*it].y0, by), y1 = std::min(rows[*it].y1, ey - 1);
                for (int y = y0; y <= y1; ++y) {
                    if (row_live[y - by] == 0)
                        continue;
                    int x0, x1;
                    row_span(s, y, x0, x1);
                    x0 = std::max(x0, bx);
                    x1 = std::min(x1, ex - 1);
                    const float fy = static_cast<float>(y) + 0.5f;
                    detail::PixelState *row = px.data() + (y - by) * kTileSize;
                    for (int x = x0; x <= x1; ++x) {
                        detail::PixelState &p = row[x - bx];
                        if (p.done)
                            continue;
                        detail::blend(p, s, static_cast<float>(x) + 0.5f, fy);
                        if (p.done) {
                            --live;
                            --row_live[y - by];
                        }
                    }
                }
            }
            for (int y = by; y < ey; ++y)
                for (int x = bx; x < ex; ++x) {
                    const auto &p = px[(y - by) * kTileSize + (x - bx)];
                    detail::write_pixel(img, x, y, p, opts.background);
                    if (opts.check_conservation)
                        detail::track_conservation(local, p);
                }
        }
        if (opts.check_conservation) {
#pragma omp critical(gscache_raster_stats)
            {
                st.max_weight_sum = std::max(st.max_weight_sum, local.max_weight_sum);
                st.min_transmittance = std::min(st.min_transmittance, local.min_transmittance);
                st.max_transmittance = std::max(st.max_transmittance, local.max_transmittance);
                st.conservation_ok = st.conservation_ok && local.conservation_ok;
            }
        }
    }
    if (stats)
        *stats = st;
    return img;
}

} // namespace gscache
