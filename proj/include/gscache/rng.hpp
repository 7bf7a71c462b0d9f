// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>

namespace gscache {

/// SplitMix64 (Steele, Lea, Flood 2014) with fixed conversions to floating
/// point; output is identical on every platform.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi), computed in double then rounded to float.
    float uniform(float lo, float hi) {
        return static_cast<float>(static_cast<double>(lo) +
                                  (static_cast<double>(hi) - static_cast<double>(lo)) * uniform01());
    }

    double uniformd(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  private:
    std::uint64_t state_;
};

} // namespace gscache
