// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#include "gscache/errors.hpp"
#include "gscache/metrics.hpp"
#include "gscache/rng.hpp"
#include "gscache/stereo.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace gscache;

namespace {

Camera eye_camera(const Vec3d &pos, const Vec3d &dir, double fov = kPi / 2) {
    return look_at(pos, pos + dir, {0, 1, 0}, fov, 64, 64);
}

Quatd random_rotation(SplitMix64 &rng) {
    return Quatd{rng.uniformd(-1, 1), rng.uniformd(-1, 1), rng.uniformd(-1, 1), rng.uniformd(-1, 1)}
        .normalized();
}

// Point inside the frustum of `c` at a random depth and image position.
Vec3d sample_inside(SplitMix64 &rng, const Camera &c) {
    const double depth = rng.uniformd(c.near, std::min(c.far, 60.0));
    const double x = rng.uniformd(-1, 1) * c.tan_half_fov_x();
    const double y = rng.uniformd(-1, 1) * c.tan_half_fov_y();
    return c.position + (c.forward() + c.right() * x + c.up() * y) * depth;
}

} // namespace

TEST(Unify, ZeroBaselineKeepsCamera) {
    const Camera c = eye_camera({1, 2, 3}, normalize(Vec3d{0.3, -0.2, 1}));
    const Camera u = unify_cameras({c, c});
    EXPECT_TRUE(test::near_vec(u.position, c.position, 1e-12));
    EXPECT_TRUE(test::near_vec(u.forward(), c.forward(), 1e-12));
    EXPECT_TRUE(test::near_vec(u.up(), c.up(), 1e-12));
    EXPECT_EQ(u.fov_y, c.fov_y);
    EXPECT_EQ(u.width, c.width);
    EXPECT_EQ(u.near, c.near);
}

TEST(Unify, TwoUnitBaselineQuarterFov) {
    const Camera l = eye_camera({-1, 0, 0}, {0, 0, 1});
    const Camera r = eye_camera({1, 0, 0}, {0, 0, 1});
    const Camera u = unify_cameras({l, r});
    EXPECT_TRUE(test::near_vec(u.forward(), {0, 0, 1}, 1e-6));
    EXPECT_TRUE(test::near_vec(u.position, {0, 0, -1}, 1e-6));
    EXPECT_NEAR(u.far, l.far + 1.0, 1e-9);
}

TEST(Unify, AveragedDirections) {
    const double s = 1.0 / std::sqrt(2.0);
    const Camera l = eye_camera({0, 0, 0}, {s, 0, s});
    const Camera r = eye_camera({0, 0, 0}, {-s, 0, s});
    const Camera u = unify_cameras({l, r});
    EXPECT_TRUE(test::near_vec(u.forward(), {0, 0, 1}, 1e-6));
    EXPECT_TRUE(test::near_vec(u.position, {0, 0, 0}, 1e-6));
    EXPECT_NEAR(norm(u.forward()), 1.0, 1e-6);
}

TEST(Unify, AntiparallelEyesRejected) {
    const Camera l = eye_camera({0, 0, 0}, {0, 0, 1});
    const Camera r = eye_camera({1, 0, 0}, {0, 0, -1});
    EXPECT_THROW(unify_cameras({l, r}), DegenerateRigError);
}

TEST(Unify, Symmetric) {
    SplitMix64 rng(3);
    for (int i = 0; i < 100; ++i) {
        Camera l = eye_camera({rng.uniformd(-5, 5), rng.uniformd(-5, 5), rng.uniformd(-5, 5)},
                              normalize(Vec3d{rng.uniformd(-1, 1), rng.uniformd(-1, 1), 1.0}));
        Camera r = eye_camera({rng.uniformd(-5, 5), rng.uniformd(-5, 5), rng.uniformd(-5, 5)},
                              normalize(Vec3d{rng.uniformd(-1, 1), rng.uniformd(-1, 1), 1.0}));
        const Camera a = unify_cameras({l, r});
        const Camera b = unify_cameras({r, l});
        EXPECT_TRUE(test::near_vec(a.position, b.position, 1e-12));
        EXPECT_TRUE(test::near_vec(a.forward(), b.forward(), 1e-12));
        EXPECT_TRUE(test::near_vec(a.up(), b.up(), 1e-12));
        EXPECT_NEAR(norm(a.forward()), 1.0, 1e-12);
    }
}

TEST(Unify, ParallelRigCoverage) {
    SplitMix64 rng(2024);
    for (int rig_i = 0; rig_i < 20; ++rig_i) {
        Camera c;
        c.position = {rng.uniformd(-20, 20), rng.uniformd(-20, 20), rng.uniformd(-20, 20)};
        c.rotation = random_rotation(rng);
        c.fov_y = rng.uniformd(0.3, 2.0);
        c.height = 64 + static_cast<int>(rng.uniform01() * 200);
        c.width = c.height + static_cast<int>(rng.uniform01() * 200);
        c.far = rng.uniformd(20, 200);
        const StereoRig rig = make_parallel_rig(c, rng.uniformd(0.01, 3.0));
        const Camera u = unify_cameras(rig);
        int inside = 0;
        for (int p = 0; p < 1000; ++p) {
            Vec3d x;
            if (p % 2 == 0)
                x = sample_inside(rng, p % 4 == 0 ? rig.left : rig.right);
            else
                x = c.position +
                    Vec3d{rng.uniformd(-30, 30), rng.uniformd(-30, 30), rng.uniformd(-30, 30)};
            const bool in_eye = in_frustum(rig.left, x, 0.0) || in_frustum(rig.right, x, 0.0);
            if (in_eye) {
                ++inside;
                ASSERT_TRUE(in_frustum(u, x, 1e-9)) << "rig " << rig_i << " point " << p;
            }
        }
        EXPECT_GE(inside, 500);
    }
}

TEST(Unify, FilterCoverageOnScene) {
    const SceneModel s = test::small_scene(9, 2000);
    const Trajectory t = generate_orbit_trajectory(test::small_orbit(10));
    for (const auto &f : t.frames) {
        StereoRig rig = make_parallel_rig(f.rig.left, 1.5);
        const Camera u = unify_cameras(rig);
        for (std::uint32_t a = 0; a < s.size(); ++a) {
            const Vec3d p(s.position(a));
            if (in_frustum(rig.left, p, s.extent(a)) || in_frustum(rig.right, p, s.extent(a)))
                ASSERT_TRUE(in_frustum(u, p, s.extent(a) + 1e-9)) << a;
        }
    }
}

TEST(RenderStereo, ZeroIpdGivesIdenticalEyes) {
    const SceneModel s = test::small_scene(2, 2000);
    OrbitParams o = test::small_orbit(3);
    o.ipd = 0.0;
    const Trajectory t = generate_orbit_trajectory(o);
    for (bool dered : {false, true})
        for (bool fast : {false, true}) {
            PipelineOptions opt;
            opt.de_redundancy = dered;
            opt.fast_kernels = fast;
            opt.cache = true;
            StereoPipeline pipe(s, opt);
            for (const auto &f : t.frames) {
                const StereoFrame fr = pipe.render(f.rig);
                ASSERT_EQ(fr.left, fr.right);
            }
        }
}

TEST(RenderStereo, DeRedundancyHalvesPasses) {
    const SceneModel s = test::small_scene(2, 2000);
    const Trajectory t = generate_orbit_trajectory(test::small_orbit(2));
    for (bool cache : {false, true}) {
        PipelineOptions on, off;
        on.de_redundancy = true;
        on.cache = off.cache = cache;
        const StereoFrame a = StereoPipeline(s, on).render(t.frames[0].rig);
        const StereoFrame b = StereoPipeline(s, off).render(t.frames[0].rig);
        EXPECT_EQ(a.record.filter_decode_passes, 1u);
        EXPECT_EQ(b.record.filter_decode_passes, 2u);
        EXPECT_EQ(a.record.decoder_calls, 1u);
        EXPECT_EQ(b.record.decoder_calls, 2u);
    }
}

TEST(RenderStereo, DeRedundancyPreservesQuality) {
    const SceneModel s = test::small_scene(4, 5000);
    const Trajectory t = generate_orbit_trajectory(test::small_orbit(4, 96));
    PipelineOptions on, off;
    on.de_redundancy = true;
    StereoPipeline a(s, on), b(s, off);
    for (const auto &f : t.frames) {
        const StereoFrame x = a.render(f.rig);
        const StereoFrame y = b.render(f.rig);
        EXPECT_GE(psnr(x.left, y.left), 30.0);
        EXPECT_GE(psnr(x.right, y.right), 30.0);
    }
}

TEST(RenderStereo, CacheWithDepthOneIsBitIdentical) {
    const SceneModel s = test::small_scene(6, 3000);
    const Trajectory t = generate_orbit_trajectory(test::small_orbit(6));
    PipelineOptions base, cached;
    cached.cache = true;
    cached.max_depth = 1;
    StereoPipeline a(s, base), b(s, cached);
    for (const auto &f : t.frames) {
        const StereoFrame x = a.render(f.rig);
        const StereoFrame y = b.render(f.rig);
        ASSERT_EQ(x.left, y.left);
        ASSERT_EQ(x.right, y.right);
    }
}

TEST(RenderStereo, StaticCameraDecodesOnlyOnce) {
    const SceneModel s = test::small_scene(6, 3000);
    const Trajectory t = generate_orbit_trajectory(test::small_orbit(2));
    PipelineOptions opt;
    opt.cache = true;
    opt.de_redundancy = true;
    StereoPipeline p(s, opt);
    const StereoFrame first = p.render(t.frames[0].rig);
    EXPECT_GT(first.record.n_decoded, 0u);
    for (int i = 1; i < 5; ++i) {
        const StereoFrame f = p.render(t.frames[0].rig);
        EXPECT_EQ(f.record.n_decoded, 0u);
        EXPECT_EQ(f.record.decoder_calls, 0u);
        EXPECT_DOUBLE_EQ(f.record.update_rate, 0.0);
        EXPECT_EQ(f.left, first.left);
    }
}

TEST(RenderStereo, RecordsAreConsistent) {
    const SceneModel s = test::small_scene(6, 3000);
    const Trajectory t = generate_orbit_trajectory(test::small_orbit(3));
    PipelineOptions opt;
    opt.cache = true;
    opt.fast_kernels = true;
    opt.check_conservation = true;
    StereoPipeline p(s, opt);
    for (const auto &f : t.frames) {
        const FrameRecord r = p.render(f.rig).record;
        EXPECT_LE(r.n_decoded, r.n_required);
        EXPECT_GE(r.update_rate, 0.0);
        EXPECT_LE(r.update_rate, 1.0);
        EXPECT_GE(r.cache_depth, 1);
        EXPECT_LE(r.cache_depth, 10);
        EXPECT_GE(r.filter_ms, 0.0);
        EXPECT_GE(r.total_ms, r.raster_left_ms);
        EXPECT_TRUE(r.conservation_ok);
    }
    EXPECT_GT(p.peak_memory_bytes(), s.memory_bytes());
}

TEST(RenderStereo, MissingCacheRejected) {
    const SceneModel s = test::small_scene(6, 100);
    const Trajectory t = generate_orbit_trajectory(test::small_orbit(2));
    PipelineOptions opt;
    opt.cache = true;
    std::vector<ComputationCache> one;
    one.emplace_back(s.size(), 10);
    EXPECT_THROW(render_stereo(s, t.frames[0].rig, one, opt), InvalidArgument);
}
