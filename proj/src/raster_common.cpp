// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#include "raster_detail.hpp"

#include "gscache/errors.hpp"

#include <algorithm>
#include <limits>

namespace gscache {

Image::Image(int w, int h, const Vec3f &fill) : width(w), height(h), rgb(3 * std::size_t(w) * h) {
    for (std::size_t i = 0; i < rgb.size(); i += 3) {
        rgb[i] = fill.x;
        rgb[i + 1] = fill.y;
        rgb[i + 2] = fill.z;
    }
}

ViewParams::ViewParams(const Camera &camera) {
    const Mat3d r = camera.rotation.to_matrix().transposed();
    for (int i = 0; i < 9; ++i)
        world_to_camera.m[i] = static_cast<float>(r.m[i]);
    position = Vec3f(camera.position);
    focal = static_cast<float>(camera.focal_px());
    cx = 0.5f * static_cast<float>(camera.width);
    cy = 0.5f * static_cast<float>(camera.height);
    tan_fov_x = static_cast<float>(camera.tan_half_fov_x());
    tan_fov_y = static_cast<float>(camera.tan_half_fov_y());
    near = static_cast<float>(camera.near);
    far = static_cast<float>(camera.far);
    width = camera.width;
    height = camera.height;
}

std::optional<Splat2D> project(const Vec3f &mean, const Quatf &rotation, const Vec3f &scale,
                               const Vec3f &color, float opacity, const ViewParams &view) {
    const Mat3f &w = view.world_to_camera;
    const Vec3f t = w * (mean - view.position);
    const float depth = -t.z;
    if (!(depth >= view.near && depth <= view.far))
        return std::nullopt;

    // Jacobian of the pinhole map, with the usual clamp on off-screen
    // positions so the linearization stays bounded.
    const float limx = 1.3f * view.tan_fov_x;
    const float limy = 1.3f * view.tan_fov_y;
    const float txc = std::clamp(t.x / depth, -limx, limx) * depth;
    const float tyc = std::clamp(t.y / depth, -limy, limy) * depth;
    const float f = view.focal;
    const float j00 = f / depth;
    const float j02 = f * txc / (depth * depth);
    const float j11 = -f / depth;
    const float j12 = -f * tyc / (depth * depth);

    // T = J W (2x3)
    float tm[2][3];
    for (int c = 0; c < 3; ++c) {
        tm[0][c] = j00 * w(0, c) + j02 * w(2, c);
        tm[1][c] = j11 * w(1, c) + j12 * w(2, c);
    }
    const Mat3f sigma = build_covariance(rotation, scale);
    float ts[2][3];
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 3; ++c)
            ts[r][c] = tm[r][0] * sigma(0, c) + tm[r][1] * sigma(1, c) + tm[r][2] * sigma(2, c);

    Splat2D s;
    s.cov.xx = ts[0][0] * tm[0][0] + ts[0][1] * tm[0][1] + ts[0][2] * tm[0][2] + kCovarianceFloor;
    s.cov.xy = ts[0][0] * tm[1][0] + ts[0][1] * tm[1][1] + ts[0][2] * tm[1][2];
    s.cov.yy = ts[1][0] * tm[1][0] + ts[1][1] * tm[1][1] + ts[1][2] * tm[1][2] + kCovarianceFloor;
    const float det = s.cov.determinant();
    s.conic = {s.cov.yy / det, -s.cov.xy / det, s.cov.xx / det};
    s.center = {view.cx + f * t.x / depth, view.cy - f * t.y / depth};
    s.depth = depth;
    s.color = color;
    s.opacity = opacity;
    s.radius = 0.0f;
    return s;
}

std::optional<Splat2D> project(const GaussianBatch &batch, std::size_t index, const Camera &camera) {
    return project(batch.mean[index], batch.rotation[index], batch.scale[index], batch.color[index],
                   batch.opacity[index], ViewParams(camera));
}

float cutoff_radius(float alpha, float eps) {
    if (!(alpha > eps))
        return 0.0f;
    return std::sqrt(2.0f * std::log(alpha / eps));
}

double min_mahalanobis_sq(const Vec2f &center, const Sym2f &conic, double x0, double x1, double y0,
                          double y1) {
    const double cx = center.x, cy = center.y;
    if (cx >= x0 && cx <= x1 && cy >= y0 && cy <= y1)
        return 0.0;
    const double a = conic.xx, b = conic.xy, c = conic.yy;
    auto q = [&](double dx, double dy) { return a * dx * dx + 2 * b * dx * dy + c * dy * dy; };
    double best = std::numeric_limits<double>::infinity();
    // Vertical edges: dx fixed, minimize over dy.
    for (double x : {x0, x1}) {
        const double dx = x - cx;
        const double dy = std::clamp(-b * dx / c, y0 - cy, y1 - cy);
        best = std::min(best, q(dx, dy));
    }
    for (double y : {y0, y1}) {
        const double dy = y - cy;
        const double dx = std::clamp(-b * dy / a, x0 - cx, x1 - cx);
        best = std::min(best, q(dx, dy));
    }
    return best;
}

TileRange tile_bounds(const Splat2D &s, int width, int height) {
    TileRange out;
    const double hx = double(s.radius) * std::sqrt(double(s.cov.xx));
    const double hy = double(s.radius) * std::sqrt(double(s.cov.yy));
    // Pixel centres px + 0.5 within [c - h, c + h].
    const double px0 = std::max(0.0, std::ceil(s.center.x - hx - 0.5));
    const double px1 = std::min(double(width - 1), std::floor(s.center.x + hx - 0.5));
    const double py0 = std::max(0.0, std::ceil(s.center.y - hy - 0.5));
    const double py1 = std::min(double(height - 1), std::floor(s.center.y + hy - 0.5));
    if (!(px0 <= px1 && py0 <= py1))
        return out;
    out.x0 = static_cast<int>(px0) / kTileSize;
    out.x1 = static_cast<int>(px1) / kTileSize;
    out.y0 = static_cast<int>(py0) / kTileSize;
    out.y1 = static_cast<int>(py1) / kTileSize;
    return out;
}

bool tile_intersects(const Splat2D &s, int tx, int ty, int width, int height) {
    const double x0 = tx * kTileSize + 0.5;
    const double x1 = std::min(tx * kTileSize + kTileSize, width) - 0.5;
    const double y0 = ty * kTileSize + 0.5;
    const double y1 = std::min(ty * kTileSize + kTileSize, height) - 0.5;
    const double r2 = double(s.radius) * double(s.radius);
    // Slack covers float rounding in the per-pixel test.
    return min_mahalanobis_sq(s.center, s.conic, x0, x1, y0, y1) <= r2 * (1.0 + 1e-3) + 1e-3;
}

std::size_t TileBins::pair_count() const {
    std::size_t n = 0;
    for (const auto &l : lists)
        n += l.size();
    return n;
}

TileBins bin_tiles(const std::vector<Splat2D> &splats, int width, int height, bool exact) {
    TileBins bins;
    bins.tiles_x = (width + kTileSize - 1) / kTileSize;
    bins.tiles_y = (height + kTileSize - 1) / kTileSize;
    bins.lists.resize(std::size_t(bins.tiles_x) * bins.tiles_y);
    for (std::uint32_t i = 0; i < splats.size(); ++i) {
        const TileRange tr = tile_bounds(splats[i], width, height);
        for (int ty = tr.y0; ty <= tr.y1; ++ty)
            for (int tx = tr.x0; tx <= tr.x1; ++tx) {
                if (exact && !tile_intersects(splats[i], tx, ty, width, height))
                    continue;
                bins.lists[std::size_t(ty) * bins.tiles_x + tx].push_back(i);
            }
    }
    for (auto &list : bins.lists)
        std::sort(list.begin(), list.end(), [&](std::uint32_t a, std::uint32_t b) {
            return detail::splat_before(splats[a], a, splats[b], b);
        });
    return bins;
}

namespace {

bool finite_row(const GaussianBatch &b, std::size_t i) {
    auto f3 = [](const Vec3f &v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); };
    const Quatf &q = b.rotation[i];
    return f3(b.mean[i]) && f3(b.scale[i]) && f3(b.color[i]) && std::isfinite(b.opacity[i]) &&
           std::isfinite(q.w) && std::isfinite(q.x) && std::isfinite(q.y) && std::isfinite(q.z);
}

bool finite_splat(const Splat2D &s) {
    return std::isfinite(s.center.x) && std::isfinite(s.center.y) && std::isfinite(s.conic.xx) &&
           std::isfinite(s.conic.xy) && std::isfinite(s.conic.yy) && std::isfinite(s.cov.xx) &&
           std::isfinite(s.cov.yy) && s.cov.determinant() > 0.0f;
}

enum class Outcome : std::uint8_t { Kept, Culled, NonFinite };

Outcome prepare_one(const GaussianBatch &batch, std::size_t i, const ViewParams &view,
                    const RasterOptions &options, Splat2D &out) {
    if (!finite_row(batch, i))
        return Outcome::NonFinite;
    auto s = project(batch.mean[i], batch.rotation[i], batch.scale[i], batch.color[i],
                     batch.opacity[i], view);
    if (!s)
        return Outcome::Culled;
    if (!finite_splat(*s))
        return Outcome::NonFinite;
    s->radius = options.opacity_cutoff ? std::min(kFixedCutoff, cutoff_radius(s->opacity))
                                       : kFixedCutoff;
    if (!(s->radius > 0.0f))
        return Outcome::Culled;
    out = *s;
    return Outcome::Kept;
}

} // namespace

std::vector<Splat2D> prepare_splats(const GaussianBatch &batch, const Camera &camera,
                                    const RasterOptions &options, RasterStats *stats) {
    const ViewParams view(camera);
    const auto n = static_cast<std::ptrdiff_t>(batch.size());
    std::vector<Splat2D> splats;
    RasterStats local;
    local.input = batch.size();

    if (options.parallel) {
        std::vector<Splat2D> tmp(static_cast<std::size_t>(n));
        std::vector<Outcome> outcome(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            outcome[i] = prepare_one(batch, static_cast<std::size_t>(i), view, options, tmp[i]);
        splats.reserve(static_cast<std::size_t>(n));
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            if (outcome[i] == Outcome::Kept)
                splats.push_back(tmp[i]);
            else if (outcome[i] == Outcome::Culled)
                ++local.culled;
            else
                ++local.nonfinite;
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            Splat2D s;
            const Outcome o = prepare_one(batch, static_cast<std::size_t>(i), view, options, s);
            if (o == Outcome::Kept)
                splats.push_back(s);
            else if (o == Outcome::Culled)
                ++local.culled;
            else
                ++local.nonfinite;
        }
    }
    local.projected = splats.size();
    if (stats)
        *stats = local;
    return splats;
}

Image rasterize(const GaussianBatch &batch, const Camera &camera, const RasterOptions &options,
                RasterStats *stats) {
    return options.parallel ? rasterize_fast(batch, camera, options, stats)
                            : rasterize_reference(batch, camera, options, stats);
}

} // namespace gscache
