// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#include "decoder_detail.hpp"

#include <omp.h>

namespace gscache {

namespace {

constexpr int kMaxHidden = 256;

} // namespace

GaussianBatch decode_anchors_fast(const SceneModel &scene, std::span<const std::uint32_t> ids,
                                  const Vec3d &viewpoint) {
    detail::check_ids(scene, ids);
    const DecoderWeights &w = scene.weights();
    const int f = scene.feature_dim();
    const int k = scene.gaussians_per_anchor();
    const int hd = w.hidden_dim;
    const auto m = static_cast<std::ptrdiff_t>(ids.size());
    const Vec3f vp(viewpoint);
    if (hd > kMaxHidden)
        return decode_anchors(scene, ids, viewpoint);

    // One slot per (anchor, j); only the first count[a] slots of an anchor
    // are filled, in ascending j.
    std::vector<detail::DecodedGaussian> slots(static_cast<std::size_t>(m) * k);
    std::vector<std::size_t> count(static_cast<std::size_t>(m) + 1, 0);

#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t a = 0; a < m; ++a) {
        const std::uint32_t id = ids[a];
        const float *feat = scene.feature(id).data();
        const Vec3f pos = scene.position(id);
        const Vec3f dv = detail::view_direction(pos, vp);
        const float dvv[3] = {dv.x, dv.y, dv.z};

        // Layer 1 reads the feature and view direction in place; same
        // accumulation order as dense_row over the concatenated input.
        float hidden[kMaxHidden];
        for (int r = 0; r < hd; ++r) {
            const float *wr = w.w1.data() + std::size_t(r) * w.in_dim;
            float acc = w.b1[r];
            for (int c = 0; c < f; ++c)
                acc += wr[c] * feat[c];
            for (int c = 0; c < 3; ++c)
                acc += wr[f + c] * dvv[c];
            hidden[r] = acc > 0.0f ? acc : 0.0f;
        }

        const float *offs = scene.offsets(id).data();
        const Vec3f s = scene.scale(id);
        std::size_t kept = 0;
        for (int j = 0; j < k; ++j) {
            const int base = j * kHeadWidth;
            float head[kHeadWidth];
            head[kHeadOpacity] = detail::dense_row(w.w2.data() + std::size_t(base) * hd, hidden, hd,
                                                   w.b2[base]);
            const float alpha = std::tanh(head[kHeadOpacity]);
            if (!(alpha > 0.0f))
                continue;
            for (int r = 1; r < kHeadWidth; ++r)
                head[r] = detail::dense_row(w.w2.data() + std::size_t(base + r) * hd, hidden, hd,
                                            w.b2[base + r]);
            slots[static_cast<std::size_t>(a) * k + kept++] =
                detail::emit_gaussian(head, alpha, pos, offs + 3 * j, s);
        }
        count[static_cast<std::size_t>(a) + 1] = kept;
    }

    for (std::ptrdiff_t a = 0; a < m; ++a)
        count[a + 1] += count[a];

    GaussianBatch batch;
    batch.resize(count[static_cast<std::size_t>(m)]);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t a = 0; a < m; ++a) {
        const std::size_t begin = count[a];
        const std::size_t n = count[a + 1] - begin;
        for (std::size_t t = 0; t < n; ++t) {
            const auto &g = slots[static_cast<std::size_t>(a) * k + t];
            const std::size_t row = begin + t;
            batch.mean[row] = g.mean;
            batch.rotation[row] = g.rotation;
            batch.scale[row] = g.scale;
            batch.color[row] = g.color;
            batch.opacity[row] = g.opacity;
            batch.source_anchor[row] = ids[a];
        }
    }
    return batch;
}

} // namespace gscache
