// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gscache {

class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed scene/trajectory file. `offset` is the byte (or line) position
/// at which decoding failed.
class FormatError : public std::runtime_error {
  public:
    FormatError(const std::string &what, std::size_t offset)
        : std::runtime_error(what + " (at offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

  private:
    std::size_t offset_;
};

class NumericDomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Stereo rig whose eye directions cannot be averaged.
class DegenerateRigError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Broken internal invariant (cache bookkeeping, eviction soundness).
class ConsistencyError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace gscache
