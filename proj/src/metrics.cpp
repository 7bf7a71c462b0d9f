// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#include "gscache/metrics.hpp"

#include "gscache/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace gscache {

namespace {

void check_same(const Image &a, const Image &b) {
    if (a.width != b.width || a.height != b.height)
        throw InvalidArgument("metrics: image dimensions differ");
}

constexpr int kWindow = 11;

std::array<double, kWindow> gaussian_kernel() {
    std::array<double, kWindow> k{};
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double x = i - kWindow / 2;
        k[i] = std::exp(-x * x / (2.0 * 1.5 * 1.5));
        sum += k[i];
    }
    for (double &v : k)
        v /= sum;
    return k;
}

/// Separable "valid" filtering: out is (w - 10) x (h - 10).
std::vector<double> filter_valid(const std::vector<double> &in, int w, int h,
                                 const std::array<double, kWindow> &k) {
    const int ow = w - kWindow + 1, oh = h - kWindow + 1;
    std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < kWindow; ++i)
                s += k[i] * in[std::size_t(y) * w + x + i];
            tmp[std::size_t(y) * ow + x] = s;
        }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < kWindow; ++i)
                s += k[i] * tmp[std::size_t(y + i) * ow + x];
            out[std::size_t(y) * ow + x] = s;
        }
    return out;
}

} // namespace

double mse(const Image &a, const Image &b) {
    check_same(a, b);
    if (a.rgb.empty())
        return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rgb.size(); ++i) {
        const double d = double(a.rgb[i]) - double(b.rgb[i]);
        sum += d * d;
    }
    return sum / double(a.rgb.size());
}

double psnr_from_mse(double m) {
    if (m <= 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / m);
}

double psnr(const Image &a, const Image &b) { return psnr_from_mse(mse(a, b)); }

std::vector<double> luma(const Image &image) {
    std::vector<double> y(static_cast<std::size_t>(image.width) * image.height);
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = 0.299 * image.rgb[3 * i] + 0.587 * image.rgb[3 * i + 1] +
               0.114 * image.rgb[3 * i + 2];
    return y;
}

double ssim(const Image &a, const Image &b) {
    check_same(a, b);
    if (a.width < kWindow || a.height < kWindow)
        throw InvalidArgument("ssim: images must be at least 11x11");
    const int w = a.width, h = a.height;
    const auto k = gaussian_kernel();
    const std::vector<double> x = luma(a), y = luma(b);
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, w, h, k), my = filter_valid(y, w, h, k);
    const auto sxx = filter_valid(xx, w, h, k), syy = filter_valid(yy, w, h, k);
    const auto sxy = filter_valid(xy, w, h, k);

    constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double sum = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double vx = sxx[i] - mx[i] * mx[i];
        const double vy = syy[i] - my[i] * my[i];
        const double cxy = sxy[i] - mx[i] * my[i];
        sum += ((2 * mx[i] * my[i] + c1) * (2 * cxy + c2)) /
               ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    return sum / double(mx.size());
}

double percentile(std::span<const double> values, double p) {
    if (values.empty())
        return 0.0;
    if (!(p >= 0.0 && p <= 100.0))
        throw InvalidArgument("percentile: p must be in [0, 100]");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double pos = p / 100.0 * double(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

double mean(std::span<const double> values) {
    if (values.empty())
        return 0.0;
    double s = 0.0;
    for (double v : values)
        s += v;
    return s / double(values.size());
}

} // namespace gscache
