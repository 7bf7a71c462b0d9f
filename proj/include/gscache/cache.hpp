// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
// Anchor-indexed computation cache with a dynamically scheduled reuse depth.
//
// Per frame:
//   age_and_evict()           start of frame; drops entries aged >= depth
//   partition(required)       hits / misses against live entries
//   decode the misses         (caller)
//   compose(part, decoded)    render buffer in (anchor id, j) order
//   commit(part, decoded)     insert misses, schedule next frame's depth
//
// The update rate that drives the depth schedule counts the misses that
// represent new work: anchors never cached, or cached under a different
// LoD cutoff. Misses whose entry was just retired by the depth rule are
// "refreshes" and are excluded, otherwise a full refresh (rate 1) would pin
// the depth at 1 forever. The first frame after construction or clear()
// keeps the initial depth D_max.
//
#pragma once

#include "gscache/decoder.hpp"

#include <cstdint>
#include <vector>

namespace gscache {

struct CacheStats {
    std::size_t required = 0;  ///< |X|
    std::size_t decoded = 0;   ///< misses decoded this frame
    std::size_t refreshed = 0; ///< misses caused by depth eviction
    double update_rate = 0.0;  ///< (decoded - refreshed) / required, 0 when nothing required
    double duplicate_rate = 1.0;
    int depth_after = 1;       ///< depth scheduled for the next frame
};

/// Linear guiding function: clamp(1 + round((D_max - 1)(1 - u)), 1, D_max),
/// rounding half away from zero.
int schedule_depth(double update_rate, int max_depth);

struct CachePartition {
    std::vector<std::uint32_t> hits;
    std::vector<std::uint32_t> misses;
    std::vector<std::uint8_t> miss_levels; ///< LoD cutoff each miss is decoded under
    CacheStats stats;                      ///< depth_after filled by commit
};

class ComputationCache {
  public:
    ComputationCache(std::size_t n_anchors, int max_depth);

    /// Starts a frame: applies the depth scheduled by the last commit,
    /// advances the frame counter and evicts entries with
    /// frame_counter - birth_frame >= depth. Returns the eviction count.
    std::size_t age_and_evict();

    /// Splits `required` into live hits (same LoD cutoff) and misses. Live
    /// entries whose cutoff changed are invalidated here.
    CachePartition partition(const AnchorIndexSet &required);

    /// Concatenates cached rows for the hits and `newly_decoded` rows for the
    /// misses in ascending anchor order. `newly_decoded` must be the decode
    /// of exactly `part.misses`. Throws ConsistencyError if a hit is not
    /// live or has outlived the current depth.
    GaussianBatch compose(const CachePartition &part, const GaussianBatch &newly_decoded) const;

    /// Stores the decoded misses with birth_frame = frame_counter and
    /// schedules the next frame's depth. Throws ConsistencyError on a
    /// double insert or rows that do not belong to the miss set.
    CacheStats commit(CachePartition &part, const GaussianBatch &newly_decoded);

    void clear();

    int current_depth() const { return depth_; }
    int scheduled_depth() const { return next_depth_; }
    int max_depth() const { return max_depth_; }
    std::int64_t frame_counter() const { return frame_; }
    std::size_t live_entries() const { return live_; }
    bool contains(std::uint32_t id) const { return id < entries_.size() && entries_[id].live; }
    std::int64_t birth_frame(std::uint32_t id) const { return entries_[id].birth; }
    std::size_t cached_rows(std::uint32_t id) const { return entries_[id].rows.size(); }
    std::size_t memory_bytes() const;

  private:
    struct Row {
        Vec3f mean;
        Quatf rotation;
        Vec3f scale;
        Vec3f color;
        float opacity;
    };
    /// An entry with no rows marks a fully masked anchor; a hit still skips
    /// decoding it.
    struct Entry {
        bool live = false;
        std::uint8_t level = 0;
        std::int64_t birth = 0;
        std::vector<Row> rows;
    };

    void evict(std::uint32_t id);

    std::vector<Entry> entries_;
    std::vector<std::uint8_t> just_evicted_;
    std::vector<std::uint32_t> evicted_ids_;
    std::size_t live_ = 0;
    int max_depth_;
    int depth_;
    int next_depth_;
    std::int64_t frame_ = -1; ///< index of the current frame; -1 before the first
};

} // namespace gscache
