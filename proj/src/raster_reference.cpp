// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#include "raster_detail.hpp"

namespace gscache {

Image rasterize_reference(const GaussianBatch &batch, const Camera &camera,
                          const RasterOptions &options, RasterStats *stats) {
    RasterOptions opts = options;
    opts.parallel = false;
    RasterStats st;
    const std::vector<Splat2D> splats = prepare_splats(batch, camera, opts, &st);
    const TileBins bins = bin_tiles(splats, camera.width, camera.height, opts.exact_tiles);
    st.tile_pairs = bins.pair_count();

    Image img(camera.width, camera.height);
    for (int ty = 0; ty < bins.tiles_y; ++ty)
        for (int tx = 0; tx < bins.tiles_x; ++tx) {
            const auto &list = bins.lists[std::size_t(ty) * bins.tiles_x + tx];
            const int x_end = std::min((tx + 1) * kTileSize, camera.width);
            const int y_end = std::min((ty + 1) * kTileSize, camera.height);
            for (int y = ty * kTileSize; y < y_end; ++y)
                for (int x = tx * kTileSize; x < x_end; ++x) {
                    detail::PixelState px;
                    const float fx = static_cast<float>(x) + 0.5f;
                    const float fy = static_cast<float>(y) + 0.5f;
                    for (std::uint32_t idx : list) {
                        detail::blend(px, splats[idx], fx, fy);
                        if (px.done)
                            break;
                    }
                    detail::write_pixel(img, x, y, px, opts.background);
                    if (opts.check_conservation)
                        detail::track_conservation(st, px);
                }
        }
    if (stats)
        *stats = st;
    return img;
}

} // namespace gscache
