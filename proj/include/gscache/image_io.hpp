// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "gscache/raster.hpp"

#include <filesystem>

namespace gscache {

/// 8-bit RGB PNG; values are clamped to [0,1] and rounded, no gamma.
void write_png(const Image &image, const std::filesystem::path &path);
Image read_png(const std::filesystem::path &path);

/// Little-endian float32 planes R, G, B, each row-major.
void write_raw(const Image &image, const std::filesystem::path &path);
Image read_raw(const std::filesystem::path &path, int width, int height);

} // namespace gscache
