// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#include "gscache/scene.hpp"

#include "gscache/errors.hpp"
#include "gscache/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

namespace gscache {

SceneModel::SceneModel(SceneMeta meta, std::vector<Vec3f> positions, std::vector<float> features,
                       std::vector<float> offsets, std::vector<Vec3f> scales,
                       std::vector<std::uint8_t> lod_levels, DecoderWeights weights)
    : meta_(meta), positions_(std::move(positions)), features_(std::move(features)),
      offsets_(std::move(offsets)), scales_(std::move(scales)), lod_levels_(std::move(lod_levels)),
      weights_(std::move(weights)) {
    validate();
    const std::size_t n = positions_.size();
    const std::size_t k = meta_.gaussians_per_anchor;
    extents_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        float best = 0.0f;
        for (std::size_t j = 0; j < k; ++j) {
            const float *o = offsets_.data() + (i * k + j) * 3;
            const Vec3f d = hadamard(Vec3f{o[0], o[1], o[2]}, scales_[i]);
            best = std::max(best, norm(d));
        }
        extents_[i] = best;
    }
}

void SceneModel::validate() const {
    const std::size_t n = positions_.size();
    const std::size_t f = meta_.feature_dim;
    const std::size_t k = meta_.gaussians_per_anchor;
    if (meta_.lod_levels < 1)
        throw InvalidArgument("scene: lod_levels must be >= 1");
    if (features_.size() != n * f || offsets_.size() != n * 3 * k || scales_.size() != n ||
        lod_levels_.size() != n)
        throw InvalidArgument("scene: anchor arrays have inconsistent lengths");
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3f &s = scales_[i];
        if (!(s.x > 0 && s.y > 0 && s.z > 0))
            throw InvalidArgument("scene: anchor " + std::to_string(i) + " has non-positive scale");
        if (lod_levels_[i] >= meta_.lod_levels)
            throw InvalidArgument("scene: anchor " + std::to_string(i) + " lod_level out of range");
    }
    const auto &w = weights_;
    if (w.in_dim != static_cast<int>(f + 3) || w.out_dim != static_cast<int>(k * kHeadWidth) ||
        w.hidden_dim <= 0)
        throw InvalidArgument("scene: decoder dimensions inconsistent with F and K");
    if (w.w1.size() != std::size_t(w.hidden_dim) * w.in_dim || w.b1.size() != std::size_t(w.hidden_dim) ||
        w.w2.size() != std::size_t(w.out_dim) * w.hidden_dim || w.b2.size() != std::size_t(w.out_dim))
        throw InvalidArgument("scene: decoder weight arrays have wrong sizes");
}

AnchorView SceneModel::anchor(std::uint32_t id) const {
    if (id >= size())
        throw InvalidArgument("scene: anchor id " + std::to_string(id) + " out of range");
    return {id, positions_[id], feature(id), offsets(id), scales_[id], lod_levels_[id]};
}

std::size_t SceneModel::memory_bytes() const {
    return positions_.size() * sizeof(Vec3f) + features_.size() * sizeof(float) +
           offsets_.size() * sizeof(float) + scales_.size() * sizeof(Vec3f) + lod_levels_.size() +
           extents_.size() * sizeof(float) +
           (weights_.w1.size() + weights_.b1.size() + weights_.w2.size() + weights_.b2.size()) *
               sizeof(float);
}

namespace {

// Bitwise comparison so that -0.0/+0.0 and NaN payloads count as differences.
template <typename T> bool bits_equal(const std::vector<T> &a, const std::vector<T> &b) {
    return a.size() == b.size() &&
           (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0);
}

} // namespace

bool SceneModel::operator==(const SceneModel &o) const {
    return std::memcmp(&meta_.bbox, &o.meta_.bbox, sizeof(BoundingBox)) == 0 &&
           meta_.feature_dim == o.meta_.feature_dim &&
           meta_.gaussians_per_anchor == o.meta_.gaussians_per_anchor &&
           meta_.lod_levels == o.meta_.lod_levels &&
           std::bit_cast<std::uint32_t>(meta_.lod_base_distance) ==
               std::bit_cast<std::uint32_t>(o.meta_.lod_base_distance) &&
           bits_equal(positions_, o.positions_) && bits_equal(features_, o.features_) &&
           bits_equal(offsets_, o.offsets_) && bits_equal(scales_, o.scales_) &&
           lod_levels_ == o.lod_levels_ && weights_.in_dim == o.weights_.in_dim &&
           weights_.hidden_dim == o.weights_.hidden_dim && weights_.out_dim == o.weights_.out_dim &&
           bits_equal(weights_.w1, o.weights_.w1) && bits_equal(weights_.b1, o.weights_.b1) &&
           bits_equal(weights_.w2, o.weights_.w2) && bits_equal(weights_.b2, o.weights_.b2);
}

namespace {

/// Rolling height field over the box; `u` in [min.z, max.z] adds a thin
/// jitter (5% of the height) around the surface.
float terrain_z(const BoundingBox &box, float x, float y, float u) {
    const Vec3f ext = box.extent();
    const double tx = 2.0 * kPi * (x - box.min.x) / ext.x;
    const double ty = 2.0 * kPi * (y - box.min.y) / ext.y;
    const double h = 0.45 + 0.2 * std::sin(2.0 * tx) * std::cos(2.0 * ty) + 0.1 * std::sin(5.0 * tx + ty);
    const double jitter = 0.05 * ((u - box.min.z) / ext.z - 0.5);
    return static_cast<float>(box.min.z + ext.z * std::clamp(h + jitter, 0.0, 1.0));
}

} // namespace

SceneModel generate_synthetic_scene(const SceneParams &p) {
    if (p.n_anchors < 1)
        throw InvalidArgument("generate_synthetic_scene: n_anchors must be >= 1");
    if (p.lod_levels < 1)
        throw InvalidArgument("generate_synthetic_scene: lod levels must be >= 1");
    if (p.lod_levels > 255)
        throw InvalidArgument("generate_synthetic_scene: lod levels must fit in a byte");
    if (p.feature_dim < 1 || p.gaussians_per_anchor < 1 || p.hidden_dim < 1)
        throw InvalidArgument("generate_synthetic_scene: dimensions must be positive");
    const Vec3f ext = p.bbox.extent();
    if (!(ext.x > 0 && ext.y > 0 && ext.z > 0))
        throw InvalidArgument("generate_synthetic_scene: bounding box has zero volume");

    const std::size_t n = p.n_anchors;
    const std::size_t f = p.feature_dim;
    const std::size_t k = p.gaussians_per_anchor;
    const std::size_t h = p.hidden_dim;

    SplitMix64 rng(p.seed);
    const float spacing = p.layout == SceneLayout::Terrain
                              ? std::sqrt(ext.x * ext.y / static_cast<float>(n))
                              : std::cbrt(p.bbox.volume() / static_cast<float>(n));

    std::vector<Vec3f> positions(n);
    std::vector<float> features(n * f);
    std::vector<float> offsets(n * 3 * k);
    std::vector<Vec3f> scales(n);
    std::vector<std::uint8_t> lods(n);
    for (std::size_t i = 0; i < n; ++i) {
        const float x = rng.uniform(p.bbox.min.x, p.bbox.max.x);
        const float y = rng.uniform(p.bbox.min.y, p.bbox.max.y);
        const float z = rng.uniform(p.bbox.min.z, p.bbox.max.z);
        positions[i] = {x, y, p.layout == SceneLayout::Terrain ? terrain_z(p.bbox, x, y, z) : z};
        for (std::size_t c = 0; c < f; ++c)
            features[i * f + c] = rng.uniform(-1.0f, 1.0f);
        for (std::size_t c = 0; c < 3 * k; ++c)
            offsets[i * 3 * k + c] = rng.uniform(-1.0f, 1.0f);
        scales[i] = {spacing * rng.uniform(0.5f, 1.0f), spacing * rng.uniform(0.5f, 1.0f),
                     spacing * rng.uniform(0.5f, 1.0f)};
        lods[i] = static_cast<std::uint8_t>(i % p.lod_levels);
    }

    DecoderWeights w;
    w.in_dim = static_cast<int>(f + 3);
    w.hidden_dim = static_cast<int>(h);
    w.out_dim = static_cast<int>(k * kHeadWidth);
    w.w1.resize(h * (f + 3));
    w.b1.resize(h);
    w.w2.resize(std::size_t(w.out_dim) * h);
    w.b2.resize(std::size_t(w.out_dim));

    // Uniform(-g, g) with g = sqrt(3 / fan_in) gives unit-variance rows.
    const float g1 = std::sqrt(3.0f / static_cast<float>(f));
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < f + 3; ++c) {
            const float gain = c < f ? g1 : g1 * p.view_gain;
            w.w1[r * (f + 3) + c] = rng.uniform(-gain, gain);
        }
    for (auto &b : w.b1)
        b = rng.uniform(-0.1f, 0.1f);

    // Per-head output gains: wider opacity and color spread than the raw
    // trunk gives, so frames have contrast and a realistic mask ratio.
    const float g2 = std::sqrt(3.0f / static_cast<float>(h));
    for (int r = 0; r < w.out_dim; ++r) {
        const int slot = r % kHeadWidth;
        float gain = g2;
        if (slot == kHeadOpacity)
            gain *= 2.5f;
        else if (slot < kHeadRotation)
            gain *= 4.0f;
        for (std::size_t c = 0; c < h; ++c)
            w.w2[std::size_t(r) * h + c] = rng.uniform(-gain, gain);
    }
    for (auto &b : w.b2)
        b = rng.uniform(-0.1f, 0.1f);

    SceneMeta meta;
    meta.feature_dim = p.feature_dim;
    meta.gaussians_per_anchor = p.gaussians_per_anchor;
    meta.lod_levels = p.lod_levels;
    meta.bbox = p.bbox;
    meta.lod_base_distance =
        p.lod_base_distance > 0 ? p.lod_base_distance : 0.25f * norm(p.bbox.extent());

    return SceneModel(meta, std::move(positions), std::move(features), std::move(offsets),
                      std::move(scales), std::move(lods), std::move(w));
}

// ---------------------------------------------------------------------------

void Camera::validate() const {
    if (std::abs(rotation.norm() - 1.0) > 1e-6)
        throw InvalidArgument("camera: rotation quaternion is not normalized");
    if (!(near > 0 && near < far))
        throw InvalidArgument("camera: require 0 < near < far");
    if (!(fov_y > 0 && fov_y < kPi))
        throw InvalidArgument("camera: require 0 < fov_y < pi");
    if (width <= 0 || height <= 0)
        throw InvalidArgument("camera: resolution must be positive");
}

Camera look_at(const Vec3d &eye, const Vec3d &target, const Vec3d &world_up, double fov_y,
               int width, int height, double near, double far) {
    const Vec3d fwd = normalize(target - eye);
    Vec3d right = cross(fwd, world_up);
    if (norm(right) < 1e-12)
        right = cross(fwd, std::abs(fwd.x) < 0.9 ? Vec3d{1, 0, 0} : Vec3d{0, 1, 0});
    right = normalize(right);
    const Vec3d up = cross(right, fwd);
    Mat3d m;
    for (int r = 0; r < 3; ++r) {
        m(r, 0) = right[r];
        m(r, 1) = up[r];
        m(r, 2) = -fwd[r];
    }
    Camera cam;
    cam.position = eye;
    cam.rotation = Quatd::from_matrix(m);
    cam.fov_y = fov_y;
    cam.width = width;
    cam.height = height;
    cam.near = near;
    cam.far = far;
    return cam;
}

void StereoRig::validate() const {
    left.validate();
    right.validate();
    if (left.fov_y != right.fov_y || left.width != right.width || left.height != right.height ||
        left.near != right.near || left.far != right.far)
        throw InvalidArgument("stereo rig: eyes must share intrinsics");
}

void Trajectory::validate() const {
    for (std::size_t i = 0; i < frames.size(); ++i) {
        frames[i].rig.validate();
        if (i > 0 && !(frames[i].timestamp > frames[i - 1].timestamp))
            throw InvalidArgument("trajectory: timestamps must be strictly increasing");
    }
}

std::uint64_t Trajectory::fingerprint() const {
    // FNV-1a over the raw bits of every serialized field.
    std::uint64_t hsh = 1469598103934665603ull;
    auto mix = [&](double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) {
            hsh ^= (bits >> (8 * b)) & 0xff;
            hsh *= 1099511628211ull;
        }
    };
    for (const auto &fr : frames) {
        mix(fr.timestamp);
        for (const Camera *c : {&fr.rig.left, &fr.rig.right}) {
            mix(c->position.x), mix(c->position.y), mix(c->position.z);
            mix(c->rotation.w), mix(c->rotation.x), mix(c->rotation.y), mix(c->rotation.z);
            mix(c->fov_y), mix(c->width), mix(c->height);
        }
    }
    return hsh;
}

StereoRig make_parallel_rig(const Camera &center_camera, double ipd) {
    const Vec3d half = center_camera.right() * (0.5 * ipd);
    StereoRig rig{center_camera, center_camera};
    rig.left.position = center_camera.position - half;
    rig.right.position = center_camera.position + half;
    return rig;
}

Trajectory generate_orbit_trajectory(const OrbitParams &p) {
    if (p.n_frames < 2)
        throw InvalidArgument("orbit: n_frames must be >= 2");
    if (!(p.radius > 0))
        throw InvalidArgument("orbit: radius must be positive");
    if (p.ipd < 0)
        throw InvalidArgument("orbit: ipd must be non-negative");
    if (!(p.frame_dt > 0))
        throw InvalidArgument("orbit: frame_dt must be positive");

    Trajectory traj;
    traj.frames.reserve(p.n_frames);
    const double last = static_cast<double>(p.n_frames - 1);
    for (std::size_t k = 0; k < p.n_frames; ++k) {
        const double s = static_cast<double>(k) / last;
        const double phi = p.sweep * s;
        const double hgt = p.height_start + (p.height_end - p.height_start) * s;
        const Vec3d eye = p.center + Vec3d{p.radius * std::cos(phi), p.radius * std::sin(phi), hgt};
        const Camera cam =
            look_at(eye, p.center, {0, 0, 1}, p.fov_y, p.width, p.height, p.near, p.far);
        traj.frames.push_back({p.frame_dt * static_cast<double>(k), make_parallel_rig(cam, p.ipd)});
    }
    return traj;
}

} // namespace gscache
