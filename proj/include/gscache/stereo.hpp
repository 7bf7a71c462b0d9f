// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
// Binocular rendering: camera unification and the per-frame pipeline
// (filter -> cache/decode -> compose -> rasterize each eye).
//
#pragma once

#include "gscache/cache.hpp"
#include "gscache/decoder.hpp"
#include "gscache/raster.hpp"
#include "gscache/scene.hpp"

#include <memory>
#include <optional>
#include <span>

namespace gscache {

/// Camera whose frustum covers both eyes of a parallel rig:
///   d = normalize((d1 + d2) / 2)
///   p = (p1 + p2) / 2 - d * |p1 - p2| / (2 tan(fov_y / 2))
/// Up is the eyes' mean up, re-orthogonalized against d. Intrinsics are
/// copied; the far plane is pushed back by the pullback distance so the
/// depth range still covers the eyes'. Throws DegenerateRigError when
/// |d1 + d2| <= 1e-6 or the up vectors cancel.
Camera unify_cameras(const StereoRig &rig);

struct PipelineOptions {
    bool cache = false;
    bool de_redundancy = false;
    bool fast_kernels = false;
    int max_depth = 10;
    bool check_conservation = false;
    Vec3f background{0, 0, 0};
};

/// Per-frame record. Timings are wall-clock milliseconds.
struct FrameRecord {
    std::size_t frame_id = 0;
    double timestamp = 0.0;
    int worker_id = 0;

    std::size_t n_required = 0;
    std::size_t n_decoded = 0;
    std::size_t n_refreshed = 0;
    double update_rate = 1.0;
    int cache_depth = 0; ///< 0 with the cache disabled
    std::size_t n_gaussians = 0;

    double filter_ms = 0.0;
    double decode_ms = 0.0;
    double compose_ms = 0.0;
    double raster_left_ms = 0.0;
    double raster_right_ms = 0.0;
    double total_ms = 0.0;

    bool displayed = false;

    // diagnostics
    std::size_t filter_decode_passes = 0;
    std::size_t decoder_calls = 0;
    std::size_t nonfinite_skipped = 0;
    std::size_t tile_pairs = 0;
    bool conservation_ok = true;
    float max_weight_sum = 0.0f;
    float min_transmittance = 1.0f;
    float max_transmittance = 0.0f;

    // session clock (seconds): when the worker took and finished the frame
    double render_start = 0.0;
    double render_end = 0.0;
};

struct StereoFrame {
    Image left;
    Image right;
    FrameRecord record;
};

/// One frame through the pipeline. `caches` must hold one cache when
/// de-redundancy is on and two (left, right) when it is off; it is ignored
/// with the cache disabled.
StereoFrame render_stereo(const SceneModel &scene, const StereoRig &rig,
                          std::span<ComputationCache> caches, const PipelineOptions &options);

/// Owns the per-worker state (caches) for a sequence of frames.
class StereoPipeline {
  public:
    StereoPipeline(const SceneModel &scene, PipelineOptions options);

    StereoFrame render(const StereoRig &rig);

    const PipelineOptions &options() const { return options_; }
    const ComputationCache &cache(int eye = 0) const { return caches_[static_cast<std::size_t>(eye)]; }
    /// High-water mark of scene + cache + frame buffers, bytes.
    std::size_t peak_memory_bytes() const { return peak_bytes_; }

  private:
    const SceneModel *scene_;
    PipelineOptions options_;
    std::vector<ComputationCache> caches_;
    std::size_t peak_bytes_ = 0;
};

} // namespace gscache
