// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
// Scene representation: anchors, decoder weights, cameras, trajectories,
// plus the deterministic synthetic-scene generator.
//
#pragma once

#include "gscache/math.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace gscache {

/// Number of decoder outputs per neural Gaussian: opacity(1), color(3),
/// rotation(4), scale(3).
inline constexpr int kHeadWidth = 11;
inline constexpr int kHeadOpacity = 0;
inline constexpr int kHeadColor = 1;
inline constexpr int kHeadRotation = 4;
inline constexpr int kHeadScale = 8;

/// Two-layer MLP trunk: hidden = relu(w1 * [feature, view_dir] + b1),
/// out = w2 * hidden + b2. Matrices are row-major.
struct DecoderWeights {
    int in_dim = 0;     ///< F + 3
    int hidden_dim = 0; ///< H
    int out_dim = 0;    ///< K * kHeadWidth
    std::vector<float> w1, b1, w2, b2;

    bool operator==(const DecoderWeights &) const = default;
};

struct BoundingBox {
    Vec3f min, max;
    float volume() const { return (max.x - min.x) * (max.y - min.y) * (max.z - min.z); }
    Vec3f center() const { return (min + max) * 0.5f; }
    Vec3f extent() const { return max - min; }
    bool operator==(const BoundingBox &) const = default;
};

struct SceneMeta {
    std::uint32_t feature_dim = 32;      ///< F
    std::uint32_t gaussians_per_anchor = 10; ///< K
    std::uint32_t lod_levels = 1;        ///< L
    float lod_base_distance = 1.0f;      ///< d0
    BoundingBox bbox;

    bool operator==(const SceneMeta &) const = default;
};

/// Read-only view of one anchor inside a SceneModel.
struct AnchorView {
    std::uint32_t id;
    Vec3f position;
    std::span<const float> feature;   ///< F values
    std::span<const float> offsets;   ///< 3K values, unit-scale local offsets
    Vec3f scale;
    std::uint8_t lod_level;
};

/// Anchors in structure-of-arrays layout. Immutable once built; shared
/// read-only across rendering workers.
class SceneModel {
  public:
    SceneModel() = default;
    SceneModel(SceneMeta meta, std::vector<Vec3f> positions, std::vector<float> features,
               std::vector<float> offsets, std::vector<Vec3f> scales,
               std::vector<std::uint8_t> lod_levels, DecoderWeights weights);

    const SceneMeta &meta() const { return meta_; }
    const DecoderWeights &weights() const { return weights_; }
    std::size_t size() const { return positions_.size(); }
    int feature_dim() const { return static_cast<int>(meta_.feature_dim); }
    int gaussians_per_anchor() const { return static_cast<int>(meta_.gaussians_per_anchor); }

    AnchorView anchor(std::uint32_t id) const;

    const Vec3f &position(std::uint32_t id) const { return positions_[id]; }
    const Vec3f &scale(std::uint32_t id) const { return scales_[id]; }
    std::uint8_t lod_level(std::uint32_t id) const { return lod_levels_[id]; }
    std::span<const float> feature(std::uint32_t id) const {
        return {features_.data() + std::size_t(id) * meta_.feature_dim, meta_.feature_dim};
    }
    std::span<const float> offsets(std::uint32_t id) const {
        const std::size_t k3 = 3u * meta_.gaussians_per_anchor;
        return {offsets_.data() + std::size_t(id) * k3, k3};
    }
    /// Largest |offset_j * scale| of the anchor; frustum guard margin.
    float extent(std::uint32_t id) const { return extents_[id]; }

    const std::vector<Vec3f> &positions() const { return positions_; }
    const std::vector<float> &features() const { return features_; }
    const std::vector<float> &all_offsets() const { return offsets_; }
    const std::vector<Vec3f> &scales() const { return scales_; }
    const std::vector<std::uint8_t> &lod_levels() const { return lod_levels_; }

    /// Bytes held by anchor arrays and decoder weights.
    std::size_t memory_bytes() const;

    /// Structural equality of everything that is serialized.
    bool operator==(const SceneModel &o) const;

  private:
    void validate() const;

    SceneMeta meta_;
    std::vector<Vec3f> positions_;
    std::vector<float> features_;
    std::vector<float> offsets_;
    std::vector<Vec3f> scales_;
    std::vector<std::uint8_t> lod_levels_;
    std::vector<float> extents_;
    DecoderWeights weights_;
};

enum class SceneLayout {
    Terrain, ///< anchors on a rolling height field (spacing from the xy area)
    Volume,  ///< anchors uniform in the box (spacing from the volume)
};

struct SceneParams {
    std::uint64_t seed = 1;
    SceneLayout layout = SceneLayout::Terrain;
    std::uint32_t n_anchors = 1000;
    BoundingBox bbox{{-20.f, -20.f, 0.f}, {20.f, 20.f, 8.f}};
    std::uint32_t lod_levels = 3;
    std::uint32_t feature_dim = 32;
    std::uint32_t gaussians_per_anchor = 10;
    std::uint32_t hidden_dim = 32;
    /// d0; non-positive means "a quarter of the bbox diagonal".
    float lod_base_distance = 0.0f;
    /// Magnitude of the view-direction columns of the first layer relative
    /// to the feature columns. Controls how view-dependent decoded
    /// appearance is.
    float view_gain = 0.1f;
};

/// Deterministic synthetic scene. Draw order from one SplitMix64 stream:
/// per anchor (position xyz, F features, 3K offsets, scale xyz), then w1,
/// b1, w2, b2 row-major. LoD levels are assigned round-robin.
SceneModel generate_synthetic_scene(const SceneParams &params);

void save_scene(const SceneModel &scene, const std::filesystem::path &path);
SceneModel load_scene(const std::filesystem::path &path);
std::vector<std::uint8_t> encode_scene(const SceneModel &scene);
SceneModel decode_scene(std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// Cameras

/// Pinhole camera. Right-handed; in camera space +X is right, +Y is up and
/// the camera looks down -Z. `rotation` maps camera axes to world axes.
struct Camera {
    Vec3d position;
    Quatd rotation;
    double fov_y = kPi / 3; ///< vertical field of view, radians
    int width = 256;
    int height = 256;
    double near = 0.1;
    double far = 1000.0;

    Vec3d forward() const { return rotation.rotate({0, 0, -1}); }
    Vec3d up() const { return rotation.rotate({0, 1, 0}); }
    Vec3d right() const { return rotation.rotate({1, 0, 0}); }
    double focal_px() const { return 0.5 * height / std::tan(0.5 * fov_y); }
    double tan_half_fov_x() const { return 0.5 * width / focal_px(); }
    double tan_half_fov_y() const { return std::tan(0.5 * fov_y); }

    /// World point in camera coordinates.
    Vec3d to_camera(const Vec3d &p) const { return rotation.conjugate().rotate(p - position); }

    /// Throws InvalidArgument unless the quaternion is unit within 1e-6,
    /// 0 < near < far and 0 < fov_y < pi.
    void validate() const;

    bool operator==(const Camera &) const = default;
};

/// Camera at `eye` looking at `target`, rolled so that camera up is as close
/// as possible to `world_up`.
Camera look_at(const Vec3d &eye, const Vec3d &target, const Vec3d &world_up, double fov_y,
               int width, int height, double near = 0.1, double far = 1000.0);

struct StereoRig {
    Camera left;
    Camera right;

    /// Throws InvalidArgument unless both eyes are valid and share intrinsics.
    void validate() const;
    bool operator==(const StereoRig &) const = default;
};

struct TrajectoryFrame {
    double timestamp = 0.0;
    StereoRig rig;
    bool operator==(const TrajectoryFrame &) const = default;
};

struct Trajectory {
    std::vector<TrajectoryFrame> frames;

    void validate() const;
    /// Stable hash of poses and timestamps; used to refuse comparing runs
    /// made on different trajectories.
    std::uint64_t fingerprint() const;
    bool operator==(const Trajectory &) const = default;
};

struct OrbitParams {
    Vec3d center{0, 0, 4};
    double radius = 30.0;
    double height_start = 12.0; ///< eye height above `center`
    double height_end = 12.0;
    std::size_t n_frames = 200;
    double ipd = 0.064;
    double fov_y = kPi / 3;
    int width = 256;
    int height = 256;
    double frame_dt = 1.0 / 60.0;
    /// Total swept azimuth, radians. Frame k sits at sweep * k / (n - 1).
    double sweep = 2 * kPi;
    double near = 0.1;
    double far = 1000.0;
};

/// Orbit around `center`; each rig looks at the center with eyes offset
/// +-ipd/2 along the rig's right axis (parallel eye directions).
Trajectory generate_orbit_trajectory(const OrbitParams &params);

/// Rig whose eyes straddle `eye_center` along its right axis.
StereoRig make_parallel_rig(const Camera &center_camera, double ipd);

void save_trajectory(const Trajectory &trajectory, const std::filesystem::path &path);
Trajectory load_trajectory(const std::filesystem::path &path);

} // namespace gscache
