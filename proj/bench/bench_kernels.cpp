// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
// Reference vs optimized kernels: decode, rasterize and one stereo frame.
//
#include "gscache/stereo.hpp"

#include <benchmark/benchmark.h>

using namespace gscache;

namespace {

struct Fixture {
    SceneModel scene;
    Camera camera;
    std::vector<std::uint32_t> ids;
    GaussianBatch batch;
    StereoRig rig;

    Fixture() {
        SceneParams p;
        p.n_anchors = 20000;
        scene = generate_synthetic_scene(p);
        OrbitParams o;
        o.n_frames = 8;
        rig = generate_orbit_trajectory(o).frames[0].rig;
        camera = rig.left;
        ids = filter_anchors(scene, camera).ids;
        batch = decode_anchors(scene, ids, camera.position);
    }
};

const Fixture &fixture() {
    static const Fixture f;
    return f;
}

void BM_FilterAnchors(benchmark::State &state) {
    const auto &f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(filter_anchors(f.scene, f.camera));
}

void BM_DecodeReference(benchmark::State &state) {
    const auto &f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(decode_anchors(f.scene, f.ids, f.camera.position));
    state.counters["anchors"] = double(f.ids.size());
}

void BM_DecodeFast(benchmark::State &state) {
    const auto &f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(decode_anchors_fast(f.scene, f.ids, f.camera.position));
    state.counters["anchors"] = double(f.ids.size());
}

void BM_RasterReference(benchmark::State &state) {
    const auto &f = fixture();
    const RasterOptions o = RasterOptions::reference();
    for (auto _ : state)
        benchmark::DoNotOptimize(rasterize_reference(f.batch, f.camera, o));
    state.counters["gaussians"] = double(f.batch.size());
}

void BM_RasterFast(benchmark::State &state) {
    const auto &f = fixture();
    const RasterOptions o = RasterOptions::fast();
    for (auto _ : state)
        benchmark::DoNotOptimize(rasterize_fast(f.batch, f.camera, o));
    state.counters["gaussians"] = double(f.batch.size());
}

void BM_StereoFrame(benchmark::State &state) {
    const auto &f = fixture();
    const bool on = state.range(0) != 0;
    PipelineOptions o;
    o.cache = o.de_redundancy = o.fast_kernels = on;
    StereoPipeline pipe(f.scene, o);
    OrbitParams op;
    op.n_frames = 200;
    const Trajectory t = generate_orbit_trajectory(op);
    std::size_t k = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(pipe.render(t.frames[k++ % t.frames.size()].rig));
}

} // namespace

BENCHMARK(BM_FilterAnchors)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DecodeReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DecodeFast)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RasterReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RasterFast)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StereoFrame)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
