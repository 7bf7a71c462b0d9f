// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#include "gscache/decoder.hpp"
#include "gscache/errors.hpp"

#include <cmath>

namespace gscache {

void GaussianBatch::clear() { resize(0); }

void GaussianBatch::reserve(std::size_t n) {
    mean.reserve(n);
    rotation.reserve(n);
    scale.reserve(n);
    color.reserve(n);
    opacity.reserve(n);
    source_anchor.reserve(n);
}

void GaussianBatch::resize(std::size_t n) {
    mean.resize(n);
    rotation.resize(n);
    scale.resize(n);
    color.resize(n);
    opacity.resize(n);
    source_anchor.resize(n);
}

void GaussianBatch::push_back(const Vec3f &mu, const Quatf &rot, const Vec3f &s, const Vec3f &c,
                              float alpha, std::uint32_t anchor) {
    mean.push_back(mu);
    rotation.push_back(rot);
    scale.push_back(s);
    color.push_back(c);
    opacity.push_back(alpha);
    source_anchor.push_back(anchor);
}

void GaussianBatch::append(const GaussianBatch &src, std::size_t begin, std::size_t end) {
    const auto b = static_cast<std::ptrdiff_t>(begin);
    const auto e = static_cast<std::ptrdiff_t>(end);
    mean.insert(mean.end(), src.mean.begin() + b, src.mean.begin() + e);
    rotation.insert(rotation.end(), src.rotation.begin() + b, src.rotation.begin() + e);
    scale.insert(scale.end(), src.scale.begin() + b, src.scale.begin() + e);
    color.insert(color.end(), src.color.begin() + b, src.color.begin() + e);
    opacity.insert(opacity.end(), src.opacity.begin() + b, src.opacity.begin() + e);
    source_anchor.insert(source_anchor.end(), src.source_anchor.begin() + b,
                         src.source_anchor.begin() + e);
}

std::size_t GaussianBatch::memory_bytes() const {
    return mean.capacity() * sizeof(Vec3f) + rotation.capacity() * sizeof(Quatf) +
           scale.capacity() * sizeof(Vec3f) + color.capacity() * sizeof(Vec3f) +
           opacity.capacity() * sizeof(float) + source_anchor.capacity() * sizeof(std::uint32_t);
}

std::optional<std::string> validate_batch(const GaussianBatch &b) {
    const std::size_t n = b.size();
    if (b.rotation.size() != n || b.scale.size() != n || b.color.size() != n ||
        b.opacity.size() != n || b.source_anchor.size() != n)
        return "column lengths differ";
    auto finite3 = [](const Vec3f &v) {
        return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
    };
    for (std::size_t i = 0; i < n; ++i) {
        const std::string at = " at row " + std::to_string(i);
        if (!finite3(b.mean[i]) || !finite3(b.scale[i]) || !finite3(b.color[i]))
            return "non-finite value" + at;
        if (std::abs(b.rotation[i].norm() - 1.0f) > 1e-5f)
            return "rotation not unit" + at;
        const Vec3f &s = b.scale[i];
        if (!(s.x > 0 && s.y > 0 && s.z > 0))
            return "non-positive scale" + at;
        if (!(b.opacity[i] > 0.0f && b.opacity[i] <= 1.0f))
            return "opacity outside (0, 1]" + at;
        const Vec3f &c = b.color[i];
        if (c.x < 0 || c.x > 1 || c.y < 0 || c.y > 1 || c.z < 0 || c.z > 1)
            return "color outside [0, 1]" + at;
        // Sylvester's criterion in double.
        const Mat3d sigma = build_covariance(Quatd(b.rotation[i]), Vec3d(s));
        const double m1 = sigma(0, 0);
        const double m2 = sigma(0, 0) * sigma(1, 1) - sigma(0, 1) * sigma(1, 0);
        if (!(m1 > 0 && m2 > 0 && sigma.determinant() > 0))
            return "covariance not positive definite" + at;
    }
    return std::nullopt;
}

int lod_cutoff(double d, double d0, int lod_levels) {
    const int top = lod_levels - 1;
    if (d <= 0.0)
        return top;
    const double level = std::floor(std::log2(d0 / d)) + top;
    return static_cast<int>(std::clamp(level, 0.0, static_cast<double>(top)));
}

bool in_frustum(const Camera &camera, const Vec3d &p, double margin) {
    const Vec3d t = camera.to_camera(p);
    const double depth = -t.z;
    if (camera.near - depth > margin || depth - camera.far > margin)
        return false;
    const double tx = camera.tan_half_fov_x();
    const double ty = camera.tan_half_fov_y();
    const double nx = std::sqrt(1.0 + tx * tx);
    const double ny = std::sqrt(1.0 + ty * ty);
    return (std::abs(t.x) - depth * tx) / nx <= margin && (std::abs(t.y) - depth * ty) / ny <= margin;
}

AnchorIndexSet filter_anchors(const SceneModel &scene, const Camera &camera) {
    AnchorIndexSet out;
    const int levels = static_cast<int>(scene.meta().lod_levels);
    const double d0 = scene.meta().lod_base_distance;
    for (std::uint32_t i = 0; i < scene.size(); ++i) {
        const Vec3d p(scene.position(i));
        if (!in_frustum(camera, p, scene.extent(i)))
            continue;
        const int cut = lod_cutoff(norm(p - camera.position), d0, levels);
        if (scene.lod_level(i) > cut)
            continue;
        out.ids.push_back(i);
        out.levels.push_back(static_cast<std::uint8_t>(cut));
        out.cutoff = std::max(out.cutoff, cut);
    }
    return out;
}

double gaussian_weight(const Vec3d &x, const Vec3d &mu, const Mat3d &sigma) {
    const double det = sigma.determinant();
    double scale = 0.0;
    for (double v : sigma.m)
        scale = std::max(scale, std::abs(v));
    if (!(std::abs(det) > 1e-12 * scale * scale * scale) || !std::isfinite(det))
        throw NumericDomainError("gaussian_weight: covariance is singular");
    // Adjugate inverse.
    Mat3d inv;
    const auto &a = sigma;
    inv(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) / det;
    inv(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) / det;
    inv(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) / det;
    inv(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) / det;
    inv(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) / det;
    inv(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) / det;
    inv(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) / det;
    inv(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) / det;
    inv(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) / det;
    const Vec3d d = x - mu;
    const double q = dot(d, inv * d);
    return std::exp(-0.5 * q);
}

} // namespace gscache
