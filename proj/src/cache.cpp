// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#include "gscache/cache.hpp"

#include "gscache/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gscache {

int schedule_depth(double update_rate, int max_depth) {
    const double u = std::clamp(update_rate, 0.0, 1.0);
    // std::round rounds half away from zero.
    const double d = 1.0 + std::round(static_cast<double>(max_depth - 1) * (1.0 - u));
    return static_cast<int>(std::clamp(d, 1.0, static_cast<double>(max_depth)));
}

ComputationCache::ComputationCache(std::size_t n_anchors, int max_depth)
    : entries_(n_anchors), just_evicted_(n_anchors, 0), max_depth_(max_depth), depth_(max_depth),
      next_depth_(max_depth) {
    if (max_depth < 1)
        throw InvalidArgument("cache: max depth must be >= 1");
}

void ComputationCache::evict(std::uint32_t id) {
    entries_[id].live = false;
    entries_[id].rows.clear();
    --live_;
}

std::size_t ComputationCache::age_and_evict() {
    depth_ = next_depth_;
    ++frame_;
    for (std::uint32_t id : evicted_ids_)
        just_evicted_[id] = 0;
    evicted_ids_.clear();
    if (live_ == 0)
        return 0;
    for (std::uint32_t id = 0; id < entries_.size(); ++id) {
        const Entry &e = entries_[id];
        if (e.live && frame_ - e.birth >= depth_) {
            evict(id);
            just_evicted_[id] = 1;
            evicted_ids_.push_back(id);
        }
    }
    return evicted_ids_.size();
}

CachePartition ComputationCache::partition(const AnchorIndexSet &required) {
    CachePartition part;
    part.hits.reserve(required.size());
    for (std::size_t i = 0; i < required.size(); ++i) {
        const std::uint32_t id = required.ids[i];
        if (id >= entries_.size())
            throw InvalidArgument("cache: anchor id " + std::to_string(id) + " out of range");
        const std::uint8_t level = required.levels[i];
        Entry &e = entries_[id];
        if (e.live && e.level == level) {
            part.hits.push_back(id);
            continue;
        }
        if (e.live)
            evict(id); // decoded under another LoD cutoff
        else if (just_evicted_[id])
            ++part.stats.refreshed;
        part.misses.push_back(id);
        part.miss_levels.push_back(level);
    }
    auto &st = part.stats;
    st.required = required.size();
    st.decoded = part.misses.size();
    st.update_rate =
        st.required == 0 ? 0.0 : double(st.decoded - st.refreshed) / double(st.required);
    st.duplicate_rate = 1.0 - st.update_rate;
    st.depth_after = depth_;
    return part;
}

GaussianBatch ComputationCache::compose(const CachePartition &part,
                                        const GaussianBatch &newly_decoded) const {
    std::size_t total = newly_decoded.size();
    for (std::uint32_t id : part.hits) {
        const Entry &e = entries_[id];
        if (!e.live)
            throw ConsistencyError("cache: hit on anchor " + std::to_string(id) + " with no entry");
        if (frame_ - e.birth >= depth_)
            throw ConsistencyError("cache: anchor " + std::to_string(id) +
                                   " reused past its reuse depth");
        total += e.rows.size();
    }

    GaussianBatch out;
    out.reserve(total);
    std::size_t h = 0, m = 0, row = 0;
    const std::size_t nd = newly_decoded.size();
    while (h < part.hits.size() || m < part.misses.size()) {
        const bool take_hit =
            m == part.misses.size() || (h < part.hits.size() && part.hits[h] < part.misses[m]);
        if (take_hit) {
            const std::uint32_t id = part.hits[h++];
            for (const Row &r : entries_[id].rows)
                out.push_back(r.mean, r.rotation, r.scale, r.color, r.opacity, id);
        } else {
            const std::uint32_t id = part.misses[m++];
            const std::size_t begin = row;
            while (row < nd && newly_decoded.source_anchor[row] == id)
                ++row;
            out.append(newly_decoded, begin, row);
        }
    }
    if (row != nd)
        throw ConsistencyError("cache: decoded rows do not match the miss set");
    return out;
}

CacheStats ComputationCache::commit(CachePartition &part, const GaussianBatch &newly_decoded) {
    std::size_t row = 0;
    const std::size_t nd = newly_decoded.size();
    for (std::size_t i = 0; i < part.misses.size(); ++i) {
        const std::uint32_t id = part.misses[i];
        Entry &e = entries_[id];
        if (e.live)
            throw ConsistencyError("cache: double insert of live anchor " + std::to_string(id));
        e.live = true;
        e.birth = frame_;
        e.level = part.miss_levels[i];
        e.rows.clear();
        while (row < nd && newly_decoded.source_anchor[row] == id) {
            e.rows.push_back({newly_decoded.mean[row], newly_decoded.rotation[row],
                              newly_decoded.scale[row], newly_decoded.color[row],
                              newly_decoded.opacity[row]});
            ++row;
        }
        ++live_;
    }
    if (row != nd)
        throw ConsistencyError("cache: decoded rows do not match the miss set");
    // The first frame is the initial fill; the depth set at construction
    // stays in force.
    next_depth_ = frame_ == 0 ? max_depth_ : schedule_depth(part.stats.update_rate, max_depth_);
    part.stats.depth_after = next_depth_;
    return part.stats;
}

void ComputationCache::clear() {
    for (auto &e : entries_) {
        e.live = false;
        e.rows.clear();
    }
    std::fill(just_evicted_.begin(), just_evicted_.end(), 0);
    evicted_ids_.clear();
    live_ = 0;
    depth_ = next_depth_ = max_depth_;
    frame_ = -1;
}

std::size_t ComputationCache::memory_bytes() const {
    std::size_t bytes = entries_.capacity() * sizeof(Entry) + just_evicted_.capacity();
    for (const auto &e : entries_)
        bytes += e.rows.capacity() * sizeof(Row);
    return bytes;
}

} // namespace gscache
