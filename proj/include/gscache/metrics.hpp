// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
// Image quality metrics on [0,1] RGB images and summary statistics.
//
#pragma once

#include "gscache/raster.hpp"

#include <span>

namespace gscache {

/// Mean squared error over all pixels and channels.
double mse(const Image &a, const Image &b);

/// 10 log10(1 / mse); +infinity for identical images.
double psnr(const Image &a, const Image &b);
double psnr_from_mse(double mse);

/// Luma (0.299 R + 0.587 G + 0.114 B), row-major.
std::vector<double> luma(const Image &image);

/// Mean SSIM over the luma plane with an 11x11 Gaussian window
/// (sigma 1.5), C1 = 0.01^2, C2 = 0.03^2. Averaged over window positions
/// fully inside the image; images must be at least 11 x 11.
double ssim(const Image &a, const Image &b);

/// Linear-interpolated percentile, p in [0, 100]. Empty input gives 0.
double percentile(std::span<const double> values, double p);

double mean(std::span<const double> values);

} // namespace gscache
