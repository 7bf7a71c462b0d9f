// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#include "gscache/decoder.hpp"
#include "gscache/errors.hpp"
#include "gscache/rng.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <numeric>

using namespace gscache;

namespace {

std::vector<std::uint32_t> all_ids(const SceneModel &s) {
    std::vector<std::uint32_t> ids(s.size());
    std::iota(ids.begin(), ids.end(), 0u);
    return ids;
}

// Scene with hand-placed anchors sharing the decoder of a generated scene.
SceneModel place_anchors(const std::vector<Vec3f> &positions, std::uint32_t lod_levels,
                         float d0, float scale = 0.1f) {
    SceneParams p;
    p.n_anchors = 1;
    p.lod_levels = lod_levels;
    const SceneModel donor = generate_synthetic_scene(p);
    SceneMeta meta = donor.meta();
    meta.lod_base_distance = d0;
    const std::size_t n = positions.size();
    std::vector<float> features(n * meta.feature_dim, 0.5f);
    std::vector<float> offsets(n * 3 * meta.gaussians_per_anchor, 0.0f);
    std::vector<Vec3f> scales(n, {scale, scale, scale});
    std::vector<std::uint8_t> lods(n);
    for (std::size_t i = 0; i < n; ++i)
        lods[i] = static_cast<std::uint8_t>(i % lod_levels);
    return SceneModel(meta, positions, features, offsets, scales, lods, donor.weights());
}

// Signed distances to the six frustum planes computed from world-space
// plane normals.
bool oracle_in_frustum(const Camera &c, const Vec3d &p, double margin) {
    const Vec3d rel = p - c.position;
    const Vec3d f = c.forward(), r = c.right(), u = c.up();
    const double tx = c.tan_half_fov_x(), ty = c.tan_half_fov_y();
    const Vec3d normals[4] = {r - f * tx, -r - f * tx, u - f * ty, -u - f * ty};
    for (const Vec3d &n : normals)
        if (dot(rel, n) / norm(n) > margin)
            return false;
    const double depth = dot(rel, f);
    return c.near - depth <= margin && depth - c.far <= margin;
}

int oracle_level(double d, double d0, int levels) {
    if (d <= 0)
        return levels - 1;
    const int l = static_cast<int>(std::floor(std::log(d0 / d) / std::log(2.0))) + levels - 1;
    return std::clamp(l, 0, levels - 1);
}

Camera random_camera(SplitMix64 &rng, const BoundingBox &bb) {
    const Vec3d eye{rng.uniformd(bb.min.x - 10, bb.max.x + 10),
                    rng.uniformd(bb.min.y - 10, bb.max.y + 10), rng.uniformd(1, 25)};
    const Vec3d target{rng.uniformd(bb.min.x, bb.max.x), rng.uniformd(bb.min.y, bb.max.y),
                       rng.uniformd(bb.min.z, bb.max.z)};
    return look_at(eye, target, {0, 0, 1}, rng.uniformd(0.5, 1.8), 64 + int(rng.uniform01() * 64),
                   64, 0.1, rng.uniformd(20, 80));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

TEST(LodCutoff, FormulaAndClamp) {
    EXPECT_EQ(lod_cutoff(1.0, 1.0, 3), 2);
    EXPECT_EQ(lod_cutoff(2.0, 1.0, 3), 1);
    EXPECT_EQ(lod_cutoff(4.0, 1.0, 3), 0);
    EXPECT_EQ(lod_cutoff(100.0, 1.0, 3), 0);
    EXPECT_EQ(lod_cutoff(0.01, 1.0, 3), 2);
    EXPECT_EQ(lod_cutoff(0.0, 1.0, 3), 2);
    EXPECT_EQ(lod_cutoff(1e6, 1.0, 1), 0);
}

TEST(Filter, AnchorBehindCameraExcluded) {
    const SceneModel s = place_anchors({{0, -5, 0}, {0, 5, 0}}, 1, 10.0f);
    const Camera c = look_at({0, 0, 0}, {0, 1, 0}, {0, 0, 1}, kPi / 3, 64, 64);
    const AnchorIndexSet set = filter_anchors(s, c);
    ASSERT_EQ(set.ids, std::vector<std::uint32_t>{1});
}

TEST(Filter, SingleLevelIsPureFrustumCulling) {
    SceneParams p;
    p.n_anchors = 1000;
    p.lod_levels = 1;
    const SceneModel s = generate_synthetic_scene(p);
    SplitMix64 rng(11);
    for (int i = 0; i < 20; ++i) {
        const Camera c = random_camera(rng, s.meta().bbox);
        const AnchorIndexSet set = filter_anchors(s, c);
        std::vector<std::uint32_t> expect;
        for (std::uint32_t a = 0; a < s.size(); ++a)
            if (oracle_in_frustum(c, Vec3d(s.position(a)), s.extent(a)))
                expect.push_back(a);
        ASSERT_EQ(set.ids, expect);
    }
}

TEST(Filter, AxisAnchorsAtPowersOfTwo) {
    const float d0 = 4.0f;
    std::vector<Vec3f> pos;
    for (int k = -4; k <= 5; ++k)
        pos.push_back({0.0f, d0 * std::ldexp(1.0f, k), 0.0f});
    const SceneModel s = place_anchors(pos, 3, d0, 1e-3f);
    const Camera c = look_at({0, 0, 0}, {0, 1, 0}, {0, 0, 1}, kPi / 3, 64, 64, 0.1, 1000.0);
    const AnchorIndexSet set = filter_anchors(s, c);
    std::vector<std::uint32_t> expect;
    for (std::uint32_t a = 0; a < s.size(); ++a) {
        const double d = norm(Vec3d(s.position(a)));
        if (oracle_in_frustum(c, Vec3d(s.position(a)), s.extent(a)) &&
            s.lod_level(a) <= oracle_level(d, d0, 3))
            expect.push_back(a);
    }
    EXPECT_EQ(set.ids, expect);
    // Every level survives close to the camera, only level 0 far away.
    EXPECT_FALSE(expect.empty());
    for (std::size_t i = 0; i < set.size(); ++i)
        EXPECT_EQ(set.levels[i], oracle_level(norm(Vec3d(s.position(set.ids[i]))), d0, 3));
}

TEST(Filter, MatchesBruteForceOver100Cameras) {
    const SceneModel s = test::small_scene(5, 1000);
    SplitMix64 rng(99);
    std::size_t total = 0;
    for (int i = 0; i < 100; ++i) {
        const Camera c = random_camera(rng, s.meta().bbox);
        const AnchorIndexSet set = filter_anchors(s, c);
        std::vector<std::uint32_t> expect;
        for (std::uint32_t a = 0; a < s.size(); ++a) {
            const Vec3d p(s.position(a));
            if (oracle_in_frustum(c, p, s.extent(a)) &&
                s.lod_level(a) <= oracle_level(norm(p - c.position), s.meta().lod_base_distance,
                                               static_cast<int>(s.meta().lod_levels)))
                expect.push_back(a);
        }
        ASSERT_EQ(set.ids, expect) << "camera " << i;
        ASSERT_EQ(set.levels.size(), set.ids.size());
        total += set.size();
    }
    EXPECT_GT(total, 0u);
}

TEST(Decode, EmptyIdsGiveEmptyBatch) {
    const SceneModel s = test::small_scene(1, 10);
    EXPECT_TRUE(decode_anchors(s, {}, {0, 0, 0}).empty());
    EXPECT_TRUE(decode_anchors_fast(s, {}, {0, 0, 0}).empty());
}

TEST(Decode, ZeroWeightsMaskEverything) {
    const SceneModel g = test::small_scene(1, 20);
    DecoderWeights w = g.weights();
    std::fill(w.w1.begin(), w.w1.end(), 0.0f);
    std::fill(w.b1.begin(), w.b1.end(), 0.0f);
    std::fill(w.w2.begin(), w.w2.end(), 0.0f);
    std::fill(w.b2.begin(), w.b2.end(), 0.0f);
    const SceneModel s(g.meta(), g.positions(), g.features(), g.all_offsets(), g.scales(),
                       g.lod_levels(), w);
    const auto ids = all_ids(s);
    EXPECT_TRUE(decode_anchors(s, ids, {1, 2, 3}).empty());
    EXPECT_TRUE(decode_anchors_fast(s, ids, {1, 2, 3}).empty());
}

TEST(Decode, InvalidIdsRejected) {
    const SceneModel s = test::small_scene(1, 10);
    const std::vector<std::uint32_t> out_of_range{3, 10};
    const std::vector<std::uint32_t> unsorted{4, 2};
    EXPECT_THROW(decode_anchors(s, out_of_range, {}), InvalidArgument);
    EXPECT_THROW(decode_anchors_fast(s, out_of_range, {}), InvalidArgument);
    EXPECT_THROW(decode_anchors(s, unsorted, {}), InvalidArgument);
}

TEST(Decode, MatchesScalarOracle) {
    const SceneModel s = test::small_scene(7, 1);
    const DecoderWeights &w = s.weights();
    const int F = s.feature_dim(), K = s.gaussians_per_anchor(), H = w.hidden_dim;
    const std::vector<std::uint32_t> ids{0};
    const GaussianBatch b = decode_anchors(s, ids, {0, 0, 0});

    const Vec3d pos(s.position(0));
    const Vec3d dir = normalize(pos);
    std::vector<double> in(F + 3);
    for (int c = 0; c < F; ++c)
        in[c] = s.feature(0)[c];
    in[F] = dir.x;
    in[F + 1] = dir.y;
    in[F + 2] = dir.z;
    std::vector<double> hid(H);
    for (int r = 0; r < H; ++r) {
        double acc = w.b1[r];
        for (int c = 0; c < F + 3; ++c)
            acc += double(w.w1[r * (F + 3) + c]) * in[c];
        hid[r] = std::max(acc, 0.0);
    }
    std::vector<double> out(K * 11);
    for (int r = 0; r < K * 11; ++r) {
        double acc = w.b2[r];
        for (int c = 0; c < H; ++c)
            acc += double(w.w2[r * H + c]) * hid[c];
        out[r] = acc;
    }
    std::size_t row = 0;
    for (int j = 0; j < K; ++j) {
        const double *h = out.data() + j * 11;
        const double alpha = std::tanh(h[0]);
        if (std::abs(alpha) < 1e-5)
            GTEST_SKIP() << "opacity too close to the mask threshold for a double oracle";
        if (alpha <= 0)
            continue;
        ASSERT_LT(row, b.size());
        EXPECT_EQ(b.source_anchor[row], 0u);
        EXPECT_NEAR(b.opacity[row], alpha, 1e-5);
        const double c[3] = {sigmoid(h[1]), sigmoid(h[2]), sigmoid(h[3])};
        EXPECT_NEAR(b.color[row].x, c[0], 1e-5);
        EXPECT_NEAR(b.color[row].y, c[1], 1e-5);
        EXPECT_NEAR(b.color[row].z, c[2], 1e-5);
        const double qn = std::sqrt(h[4] * h[4] + h[5] * h[5] + h[6] * h[6] + h[7] * h[7]);
        EXPECT_NEAR(b.rotation[row].w, h[4] / qn, 1e-5);
        EXPECT_NEAR(b.rotation[row].x, h[5] / qn, 1e-5);
        EXPECT_NEAR(b.rotation[row].y, h[6] / qn, 1e-5);
        EXPECT_NEAR(b.rotation[row].z, h[7] / qn, 1e-5);
        const Vec3d as(s.scale(0));
        EXPECT_NEAR(b.scale[row].x, sigmoid(h[8]) * as.x, 1e-6 * as.x);
        EXPECT_NEAR(b.scale[row].y, sigmoid(h[9]) * as.y, 1e-6 * as.y);
        EXPECT_NEAR(b.scale[row].z, sigmoid(h[10]) * as.z, 1e-6 * as.z);
        const auto off = s.offsets(0);
        EXPECT_NEAR(b.mean[row].x, pos.x + off[3 * j] * as.x, 1e-5);
        EXPECT_NEAR(b.mean[row].y, pos.y + off[3 * j + 1] * as.y, 1e-5);
        EXPECT_NEAR(b.mean[row].z, pos.z + off[3 * j + 2] * as.z, 1e-5);
        ++row;
    }
    EXPECT_EQ(row, b.size());
    EXPECT_GT(b.size(), 0u);
}

TEST(Decode, PureFunctionOfInputs) {
    const SceneModel s = test::small_scene(3, 200);
    const auto ids = all_ids(s);
    EXPECT_EQ(decode_anchors(s, ids, {1, 2, 3}), decode_anchors(s, ids, {1, 2, 3}));
}

TEST(Decode, FastPathMatchesReferenceOver50Cases) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        SceneParams p;
        p.seed = seed;
        p.n_anchors = 50 + static_cast<std::uint32_t>(seed * 7);
        p.feature_dim = 8 + static_cast<std::uint32_t>(seed % 4) * 8;
        p.gaussians_per_anchor = 1 + static_cast<std::uint32_t>(seed % 10);
        p.hidden_dim = 16 + static_cast<std::uint32_t>(seed % 3) * 8;
        const SceneModel s = generate_synthetic_scene(p);
        SplitMix64 rng(seed);
        std::vector<std::uint32_t> ids;
        for (std::uint32_t a = 0; a < s.size(); ++a)
            if (rng.uniform01() < 0.6)
                ids.push_back(a);
        const Vec3d vp{rng.uniformd(-30, 30), rng.uniformd(-30, 30), rng.uniformd(0, 20)};
        const GaussianBatch ref = decode_anchors(s, ids, vp);
        const GaussianBatch fast = decode_anchors_fast(s, ids, vp);
        ASSERT_EQ(ref.size(), fast.size()) << seed;
        ASSERT_EQ(ref.source_anchor, fast.source_anchor) << seed;
        // Bitwise equality implies the 1e-5 relative contract.
        ASSERT_EQ(std::memcmp(ref.mean.data(), fast.mean.data(), ref.size() * sizeof(Vec3f)), 0);
        ASSERT_TRUE(ref == fast) << seed;
    }
}

TEST(Decode, EmittedGaussiansSatisfyBatchInvariants) {
    const SceneModel s = test::small_scene(21, 500);
    const auto ids = all_ids(s);
    const GaussianBatch b = decode_anchors(s, ids, {0, 0, 30});
    ASSERT_GT(b.size(), 0u);
    const auto err = validate_batch(b);
    EXPECT_FALSE(err.has_value()) << *err;
    for (std::size_t i = 1; i < b.size(); ++i)
        ASSERT_LE(b.source_anchor[i - 1], b.source_anchor[i]);
}

TEST(Decode, ValidatorFlagsBrokenRows) {
    GaussianBatch b;
    b.push_back({0, 0, 0}, {1, 0, 0, 0}, {1, 1, 1}, {0.5f, 0.5f, 0.5f}, 0.5f, 0);
    EXPECT_FALSE(validate_batch(b).has_value());
    GaussianBatch bad = b;
    bad.rotation[0] = {2, 0, 0, 0};
    EXPECT_TRUE(validate_batch(bad).has_value());
    bad = b;
    bad.scale[0].y = 0;
    EXPECT_TRUE(validate_batch(bad).has_value());
    bad = b;
    bad.opacity[0] = 0;
    EXPECT_TRUE(validate_batch(bad).has_value());
    bad = b;
    bad.mean[0].x = std::nanf("");
    EXPECT_TRUE(validate_batch(bad).has_value());
}

TEST(Covariance, IdentityRotation) {
    const Mat3d s = build_covariance(Quatd{}, Vec3d{1, 2, 3});
    EXPECT_EQ(s, Mat3d::diagonal({1, 4, 9}));
}

TEST(Covariance, QuarterTurnAboutZ) {
    const Quatd q = Quatd::from_axis_angle({0, 0, 1}, kPi / 2);
    const Mat3d s = build_covariance(q, Vec3d{2, 1, 1});
    const Mat3d e = Mat3d::diagonal({1, 4, 1});
    for (int i = 0; i < 9; ++i)
        EXPECT_NEAR(s.m[i], e.m[i], 1e-12);
}

TEST(Covariance, SymmetricWithSquaredScaleDeterminant) {
    SplitMix64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        const Quatd q = Quatd{rng.uniformd(-1, 1), rng.uniformd(-1, 1), rng.uniformd(-1, 1),
                              rng.uniformd(-1, 1)}
                            .normalized();
        const Vec3d sc{rng.uniformd(0.1, 3), rng.uniformd(0.1, 3), rng.uniformd(0.1, 3)};
        const Mat3d s = build_covariance(q, sc);
        EXPECT_EQ(s, s.transposed());
        const double expect = std::pow(sc.x * sc.y * sc.z, 2);
        EXPECT_NEAR(s.determinant(), expect, 1e-9 * expect);
    }
}

TEST(GaussianWeight, ClosedForms) {
    EXPECT_DOUBLE_EQ(gaussian_weight({1, 2, 3}, {1, 2, 3}, Mat3d::identity()), 1.0);
    EXPECT_NEAR(gaussian_weight({1, 0, 0}, {0, 0, 0}, Mat3d::identity()), 0.60653, 1e-5);
    EXPECT_NEAR(gaussian_weight({2, 0, 0}, {0, 0, 0}, Mat3d::diagonal({4, 1, 1})), std::exp(-0.5),
                1e-12);
}

TEST(GaussianWeight, InUnitIntervalAwayFromMean) {
    SplitMix64 rng(8);
    for (int i = 0; i < 200; ++i) {
        const Mat3d s = build_covariance(Quatd{1, 0.2, -0.1, 0.3}.normalized(),
                                         Vec3d{rng.uniformd(0.5, 2), rng.uniformd(0.5, 2), 1.0});
        const Vec3d x{rng.uniformd(-2, 2), rng.uniformd(-2, 2), rng.uniformd(-2, 2)};
        const double g = gaussian_weight(x, {0, 0, 0}, s);
        EXPECT_GT(g, 0.0);
        EXPECT_LT(g, 1.0);
    }
}

TEST(GaussianWeight, SingularCovarianceThrows) {
    EXPECT_THROW(gaussian_weight({1, 0, 0}, {0, 0, 0}, Mat3d::diagonal({1, 0, 1})),
                 NumericDomainError);
}
