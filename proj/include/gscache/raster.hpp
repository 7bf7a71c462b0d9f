// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
// Tile-based software Gaussian rasterizer.
//
// Every splat has a support radius r (Mahalanobis units): 3 in the
// reference configuration, min(3, cutoff_radius(alpha)) with the
// opacity-scaled cutoff. A pixel receives a splat only when its Mahalanobis
// distance is <= r and alpha * g >= 1/255. Because the per-pixel support
// test does not depend on binning, dropping tiles that lie entirely outside
// the ellipse never changes the image.
//
#pragma once

#include "gscache/decoder.hpp"
#include "gscache/scene.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace gscache {

inline constexpr int kTileSize = 16;
inline constexpr float kBlendThreshold = 1.0f / 255.0f;
inline constexpr float kTransmittanceFloor = 1e-4f;
inline constexpr float kFixedCutoff = 3.0f;
inline constexpr float kCovarianceFloor = 0.3f;

struct Splat2D {
    Vec2f center;   ///< pixels
    Sym2f cov;      ///< screen-space covariance incl. the 0.3 px^2 floor
    Sym2f conic;    ///< inverse of cov
    float depth;    ///< view-space distance along the optical axis
    Vec3f color;
    float opacity;
    float radius;   ///< support radius, Mahalanobis units
};

struct Image {
    int width = 0;
    int height = 0;
    std::vector<float> rgb; ///< interleaved, row-major, top row first

    Image() = default;
    Image(int w, int h, const Vec3f &fill = {0, 0, 0});
    Vec3f at(int x, int y) const {
        const std::size_t i = 3 * (std::size_t(y) * width + x);
        return {rgb[i], rgb[i + 1], rgb[i + 2]};
    }
    bool operator==(const Image &) const = default;
};

/// Camera quantities the projection needs, precomputed once per view.
struct ViewParams {
    Mat3f world_to_camera;
    Vec3f position;
    float focal;
    float cx, cy;
    float tan_fov_x, tan_fov_y;
    float near, far;
    int width, height;

    explicit ViewParams(const Camera &camera);
};

/// EWA projection of one Gaussian. Returns nullopt when the mean is outside
/// [near, far] along the view axis. `radius` is left at 0; callers assign
/// the support radius.
std::optional<Splat2D> project(const Vec3f &mean, const Quatf &rotation, const Vec3f &scale,
                               const Vec3f &color, float opacity, const ViewParams &view);
std::optional<Splat2D> project(const GaussianBatch &batch, std::size_t index, const Camera &camera);

/// sqrt(2 ln(alpha / eps)) if alpha > eps, else 0.
float cutoff_radius(float alpha, float eps = kBlendThreshold);

/// Minimum of (p - c)^T conic (p - c) over the axis-aligned rectangle
/// [x0, x1] x [y0, y1]. Zero when c is inside.
double min_mahalanobis_sq(const Vec2f &center, const Sym2f &conic, double x0, double x1, double y0,
                          double y1);

struct TileRange {
    int x0 = 0, x1 = -1, y0 = 0, y1 = -1; ///< inclusive tile bounds; empty when x1 < x0
    bool empty() const { return x1 < x0 || y1 < y0; }
};

/// Tiles overlapped by the axis-aligned box of the splat's r-ellipse,
/// restricted to pixel centres inside the image.
TileRange tile_bounds(const Splat2D &splat, int width, int height);

/// False when every pixel centre of tile (tx, ty) is farther than the
/// splat's radius. Conservative: borderline tiles are kept.
bool tile_intersects(const Splat2D &splat, int tx, int ty, int width, int height);

struct TileBins {
    int tiles_x = 0, tiles_y = 0;
    std::vector<std::vector<std::uint32_t>> lists; ///< per tile, sorted front to back
    std::size_t pair_count() const;
};

/// Assigns splats to tiles. With `exact` the AABB tiles are further
/// filtered by tile_intersects. Each list is sorted by depth, then by splat
/// content, then by index.
TileBins bin_tiles(const std::vector<Splat2D> &splats, int width, int height, bool exact);

struct RasterOptions {
    bool opacity_cutoff = false;  ///< support radius min(3, cutoff_radius(alpha))
    bool exact_tiles = false;     ///< drop AABB tiles outside the ellipse
    bool parallel = false;        ///< OpenMP over splats and tiles, flat bins
    bool check_conservation = false;
    Vec3f background{0, 0, 0};

    static RasterOptions reference() { return {}; }
    static RasterOptions fast() { return {true, true, true, false, {0, 0, 0}}; }
};

struct RasterStats {
    std::size_t input = 0;
    std::size_t projected = 0;
    std::size_t culled = 0;
    std::size_t nonfinite = 0;
    std::size_t tile_pairs = 0;
    /// Set when check_conservation is on.
    float max_weight_sum = 0.0f;
    float min_transmittance = 1.0f;
    float max_transmittance = 0.0f;
    bool conservation_ok = true;
};

/// Projects, culls and assigns support radii; splat i of the result keeps
/// the relative order of the surviving batch rows.
std::vector<Splat2D> prepare_splats(const GaussianBatch &batch, const Camera &camera,
                                    const RasterOptions &options, RasterStats *stats = nullptr);

/// Serial reference rasterizer (per-tile vectors, full tile scans).
Image rasterize_reference(const GaussianBatch &batch, const Camera &camera,
                          const RasterOptions &options, RasterStats *stats = nullptr);

/// Parallel rasterizer: flat key/range bins, per-splat pixel windows.
/// Produces the same image as rasterize_reference for equal options.
Image rasterize_fast(const GaussianBatch &batch, const Camera &camera, const RasterOptions &options,
                     RasterStats *stats = nullptr);

/// Dispatches on options.parallel.
Image rasterize(const GaussianBatch &batch, const Camera &camera, const RasterOptions &options,
                RasterStats *stats = nullptr);

} // namespace gscache
