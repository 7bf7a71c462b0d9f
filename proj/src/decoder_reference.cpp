// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#include "decoder_detail.hpp"

namespace gscache {

GaussianBatch decode_anchors(const SceneModel &scene, std::span<const std::uint32_t> ids,
                             const Vec3d &viewpoint) {
    detail::check_ids(scene, ids);
    const DecoderWeights &w = scene.weights();
    const int f = scene.feature_dim();
    const int k = scene.gaussians_per_anchor();
    const std::size_t m = ids.size();
    const Vec3f vp(viewpoint);

    // concat(feature, view_dir) for every anchor
    std::vector<float> input(m * w.in_dim);
    for (std::size_t a = 0; a < m; ++a) {
        float *row = input.data() + a * w.in_dim;
        const auto feat = scene.feature(ids[a]);
        std::copy(feat.begin(), feat.end(), row);
        const Vec3f dv = detail::view_direction(scene.position(ids[a]), vp);
        row[f] = dv.x;
        row[f + 1] = dv.y;
        row[f + 2] = dv.z;
    }

    std::vector<float> hidden(m * w.hidden_dim);
    for (std::size_t a = 0; a < m; ++a)
        for (int r = 0; r < w.hidden_dim; ++r) {
            const float v = detail::dense_row(w.w1.data() + std::size_t(r) * w.in_dim,
                                              input.data() + a * w.in_dim, w.in_dim, w.b1[r]);
            hidden[a * w.hidden_dim + r] = v > 0.0f ? v : 0.0f;
        }

    std::vector<float> out(m * w.out_dim);
    for (std::size_t a = 0; a < m; ++a)
        for (int r = 0; r < w.out_dim; ++r)
            out[a * w.out_dim + r] =
                detail::dense_row(w.w2.data() + std::size_t(r) * w.hidden_dim,
                                  hidden.data() + a * w.hidden_dim, w.hidden_dim, w.b2[r]);

    // Opacity mask over all (anchor, j) heads, then gather survivors.
    std::vector<float> alpha(m * k);
    std::vector<std::uint8_t> mask(m * k);
    for (std::size_t a = 0; a < m; ++a)
        for (int j = 0; j < k; ++j) {
            alpha[a * k + j] = std::tanh(out[a * w.out_dim + j * kHeadWidth + kHeadOpacity]);
            mask[a * k + j] = alpha[a * k + j] > 0.0f;
        }

    GaussianBatch batch;
    for (std::size_t a = 0; a < m; ++a) {
        const std::uint32_t id = ids[a];
        const auto offs = scene.offsets(id);
        for (int j = 0; j < k; ++j) {
            if (!mask[a * k + j])
                continue;
            const auto g = detail::emit_gaussian(out.data() + a * w.out_dim + j * kHeadWidth,
                                                 alpha[a * k + j], scene.position(id),
                                                 offs.data() + 3 * j, scene.scale(id));
            batch.push_back(g.mean, g.rotation, g.scale, g.color, g.opacity, id);
        }
    }
    return batch;
}

} // namespace gscache
