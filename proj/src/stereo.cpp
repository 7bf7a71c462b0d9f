// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#include "gscache/stereo.hpp"

#include "gscache/errors.hpp"

#include <chrono>

namespace gscache {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct PassResult {
    GaussianBatch batch;
    CacheStats stats;
    bool cached = false;
};

/// filter -> (cache) -> decode -> compose for one view.
PassResult derive(const SceneModel &scene, const Camera &view, ComputationCache *cache,
                  const PipelineOptions &opt, FrameRecord &rec) {
    PassResult out;
    auto t0 = Clock::now();
    const AnchorIndexSet required = filter_anchors(scene, view);
    rec.filter_ms += ms_since(t0);
    ++rec.filter_decode_passes;

    auto decode = [&](std::span<const std::uint32_t> ids) {
        ++rec.decoder_calls;
        auto td = Clock::now();
        GaussianBatch b = opt.fast_kernels ? decode_anchors_fast(scene, ids, view.position)
                                           : decode_anchors(scene, ids, view.position);
        rec.decode_ms += ms_since(td);
        return b;
    };

    if (!cache) {
        out.batch = decode(required.ids);
        out.stats.required = out.stats.decoded = required.size();
        out.stats.update_rate = 1.0;
        out.stats.duplicate_rate = 0.0;
        out.stats.depth_after = 0;
        return out;
    }

    t0 = Clock::now();
    cache->age_and_evict();
    CachePartition part = cache->partition(required);
    rec.compose_ms += ms_since(t0);

    GaussianBatch fresh;
    if (!part.misses.empty())
        fresh = decode(part.misses);

    t0 = Clock::now();
    out.batch = cache->compose(part, fresh);
    out.stats = cache->commit(part, fresh);
    rec.compose_ms += ms_since(t0);
    out.cached = true;
    return out;
}

void add_stats(FrameRecord &rec, const CacheStats &st) {
    rec.n_required += st.required;
    rec.n_decoded += st.decoded;
    rec.n_refreshed += st.refreshed;
}

Image raster_eye(const GaussianBatch &batch, const Camera &eye, const PipelineOptions &opt,
                 FrameRecord &rec, double &ms) {
    RasterOptions ro = opt.fast_kernels ? RasterOptions::fast() : RasterOptions::reference();
    ro.check_conservation = opt.check_conservation;
    ro.background = opt.background;
    RasterStats st;
    const auto t0 = Clock::now();
    Image img = rasterize(batch, eye, ro, &st);
    ms += ms_since(t0);
    rec.nonfinite_skipped += st.nonfinite;
    rec.tile_pairs += st.tile_pairs;
    if (opt.check_conservation) {
        rec.conservation_ok = rec.conservation_ok && st.conservation_ok;
        rec.max_weight_sum = std::max(rec.max_weight_sum, st.max_weight_sum);
        rec.min_transmittance = std::min(rec.min_transmittance, st.min_transmittance);
        rec.max_transmittance = std::max(rec.max_transmittance, st.max_transmittance);
    }
    return img;
}

} // namespace

Camera unify_cameras(const StereoRig &rig) {
    rig.validate();
    const Camera &a = rig.left;
    const Camera &b = rig.right;
    const Vec3d sum = a.forward() + b.forward();
    if (!(norm(sum) > 1e-6))
        throw DegenerateRigError("unify_cameras: eye directions are antiparallel");
    const Vec3d dir = normalize(sum / 2.0);
    const double baseline = norm(a.position - b.position);
    const double pullback = baseline / (2.0 * std::tan(a.fov_y / 2.0));
    const Vec3d pos = (a.position + b.position) / 2.0 - dir * pullback;

    Vec3d up = a.up() + b.up();
    up = up - dir * dot(up, dir);
    if (!(norm(up) > 1e-9))
        throw DegenerateRigError("unify_cameras: eye up vectors cancel");
    up = normalize(up);
    const Vec3d right = normalize(cross(dir, up));
    up = cross(right, dir);

    Mat3d m;
    for (int r = 0; r < 3; ++r) {
        m(r, 0) = right[r];
        m(r, 1) = up[r];
        m(r, 2) = -dir[r];
    }
    Camera out = a;
    out.position = pos;
    out.rotation = Quatd::from_matrix(m);
    out.far = a.far + pullback;
    return out;
}

StereoFrame render_stereo(const SceneModel &scene, const StereoRig &rig,
                          std::span<ComputationCache> caches, const PipelineOptions &opt) {
    rig.validate();
    const std::size_t needed = opt.de_redundancy ? 1 : 2;
    if (opt.cache && caches.size() < needed)
        throw InvalidArgument("render_stereo: not enough caches for this configuration");

    StereoFrame frame;
    FrameRecord &rec = frame.record;
    const auto t_start = Clock::now();

    if (opt.de_redundancy) {
        const Camera unified = unify_cameras(rig);
        PassResult pass = derive(scene, unified, opt.cache ? &caches[0] : nullptr, opt, rec);
        add_stats(rec, pass.stats);
        rec.cache_depth = opt.cache ? pass.stats.depth_after : 0;
        rec.n_gaussians = pass.batch.size();
        frame.left = raster_eye(pass.batch, rig.left, opt, rec, rec.raster_left_ms);
        frame.right = raster_eye(pass.batch, rig.right, opt, rec, rec.raster_right_ms);
    } else {
        // Sequential alternating: each eye runs its own full pass.
        PassResult left = derive(scene, rig.left, opt.cache ? &caches[0] : nullptr, opt, rec);
        frame.left = raster_eye(left.batch, rig.left, opt, rec, rec.raster_left_ms);
        PassResult right = derive(scene, rig.right, opt.cache ? &caches[1] : nullptr, opt, rec);
        frame.right = raster_eye(right.batch, rig.right, opt, rec, rec.raster_right_ms);
        add_stats(rec, left.stats);
        add_stats(rec, right.stats);
        rec.cache_depth = opt.cache ? left.stats.depth_after : 0;
        rec.n_gaussians = left.batch.size() + right.batch.size();
    }

    if (opt.cache)
        rec.update_rate = rec.n_required == 0
                              ? 0.0
                              : double(rec.n_decoded - rec.n_refreshed) / double(rec.n_required);
    else
        rec.update_rate = 1.0;
    rec.total_ms = ms_since(t_start);
    return frame;
}

StereoPipeline::StereoPipeline(const SceneModel &scene, PipelineOptions options)
    : scene_(&scene), options_(options) {
    if (options_.cache) {
        const int n = options_.de_redundancy ? 1 : 2;
        for (int i = 0; i < n; ++i)
            caches_.emplace_back(scene.size(), options_.max_depth);
    }
}

StereoFrame StereoPipeline::render(const StereoRig &rig) {
    StereoFrame frame = render_stereo(*scene_, rig, caches_, options_);
    std::size_t bytes = scene_->memory_bytes();
    for (const auto &c : caches_)
        bytes += c.memory_bytes();
    bytes += (frame.left.rgb.size() + frame.right.rgb.size()) * sizeof(float);
    // Composed batch rows (mean, rotation, scale, color, opacity, source).
    bytes += frame.record.n_gaussians * (3 * sizeof(Vec3f) + sizeof(Quatf) + 2 * sizeof(float));
    peak_bytes_ = std::max(peak_bytes_, bytes);
    return frame;
}

} // namespace gscache
