// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#include "gscache/errors.hpp"
#include "gscache/harness.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace gscache;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string &name) {
    const fs::path d = fs::temp_directory_path() / "gscache_tests" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::vector<std::string> read_lines(const fs::path &p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);)
        out.push_back(line);
    return out;
}

std::vector<std::string> split(const std::string &s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string f; std::getline(ss, f, ',');)
        out.push_back(f);
    return out;
}

int run_cli(const std::string &args) {
    const std::string cmd = std::string(GSCACHE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(FramesCsv, GoldenHeaderAndRow) {
    FrameRecord r;
    r.frame_id = 3;
    r.timestamp = 0.05;
    r.worker_id = 1;
    r.n_required = 100;
    r.n_decoded = 25;
    r.update_rate = 0.25;
    r.cache_depth = 8;
    r.n_gaussians = 640;
    r.filter_ms = 1.5;
    r.decode_ms = 2.25;
    r.raster_left_ms = 3;
    r.raster_right_ms = 4;
    r.total_ms = 11;
    r.displayed = true;
    std::ostringstream out;
    write_frames_csv(out, {r});
    const std::string expected =
        "frame_id,timestamp_s,worker_id,n_required_anchors,n_decoded_anchors,update_rate,"
        "cache_depth,n_gaussians,filter_ms,decode_ms,raster_left_ms,raster_right_ms,total_ms,"
        "displayed\n"
        "3,0.050000000,1,100,25,0.250000,8,640,1.500000,2.250000,3.000000,4.000000,11.000000,1\n";
    EXPECT_EQ(out.str(), expected);
}

TEST(RunConfig, Validation) {
    RunConfig c;
    EXPECT_NO_THROW(c.validate());
    c.max_depth = 0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.min_fps = 100;
    c.max_fps = 50;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.quality = true;
    c.flags.elastic = true;
    EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(RunFlags, Labels) {
    EXPECT_EQ(RunFlags{}.label(), "baseline");
    EXPECT_EQ(RunFlags::all_on().label(), "cache+dered+fast");
    EXPECT_EQ((RunFlags{true, false, false, true}).label(), "cache+elastic");
}

TEST(Benchmark, SelfComparisonIsInfinitePsnr) {
    const SceneModel s = test::small_scene(2, 1500);
    const Trajectory t = generate_orbit_trajectory(test::small_orbit(4, 32));
    RunConfig c;
    c.quality = true;
    c.out_dir = fresh_dir("selfcmp");
    const MetricReport r = run_benchmark(s, t, c);
    ASSERT_EQ(r.per_frame.size(), 4u);
    for (const auto &m : r.per_frame) {
        EXPECT_TRUE(std::isinf(m.psnr));
        EXPECT_EQ(m.mse, 0.0);
        EXPECT_DOUBLE_EQ(m.ssim, 1.0);
    }
    nlohmann::json j;
    std::ifstream(c.out_dir / "summary.json") >> j;
    EXPECT_EQ(j["quality"]["min_psnr_db"], "inf");
    EXPECT_EQ(j["quality"]["lpips"], "n/a");
    const auto lines = read_lines(c.out_dir / "frames.csv");
    ASSERT_EQ(lines.size(), 5u);
    EXPECT_EQ(lines[0], kFramesCsvHeader);
    EXPECT_EQ(split(lines[1]).size(), 14u);
}

TEST(Benchmark, SummaryRoundTrip) {
    const SceneModel s = test::small_scene(2, 1500);
    const Trajectory t = generate_orbit_trajectory(test::small_orbit(4, 32));
    RunConfig c;
    c.flags = RunFlags::all_on();
    c.quality = true;
    const MetricReport r = run_benchmark(s, t, c);
    const MetricReport back = report_from_json(to_json(r));
    EXPECT_EQ(back.label, r.label);
    EXPECT_EQ(back.flags, r.flags);
    EXPECT_EQ(back.trajectory_fingerprint, t.fingerprint());
    EXPECT_EQ(back.n_frames, 4u);
    EXPECT_DOUBLE_EQ(back.avg_fps, r.avg_fps);
    EXPECT_DOUBLE_EQ(back.min_ssim, r.min_ssim);
    EXPECT_EQ(back.min_psnr, r.min_psnr);
    EXPECT_THROW(report_from_json(nlohmann::json::object()), InvalidArgument);
}

TEST(Benchmark, StaticCameraStopsDecoding) {
    const SceneModel s = test::small_scene(2, 4000);
    const Trajectory orbit = generate_orbit_trajectory(test::small_orbit(2, 32));
    Trajectory still;
    for (int k = 0; k < 6; ++k)
        still.frames.push_back({k / 60.0, orbit.frames[0].rig});
    RunConfig c;
    c.flags = RunFlags::all_on();
    const MetricReport r = run_benchmark(s, still, c);
    ASSERT_EQ(r.records.size(), 6u);
    EXPECT_GT(r.records[0].n_decoded, 0u);
    for (std::size_t k = 1; k < r.records.size(); ++k) {
        EXPECT_EQ(r.records[k].n_decoded, 0u);
        EXPECT_DOUBLE_EQ(r.records[k].update_rate, 0.0);
        EXPECT_LT(r.records[k].decode_ms, 0.1 * r.records[0].decode_ms);
    }
}

TEST(Benchmark, SimulatedElasticRunIsDeterministic) {
    const SceneModel s = test::small_scene(2, 800);
    const Trajectory t = generate_orbit_trajectory(test::small_orbit(30, 32));
    RunConfig c;
    c.flags = RunFlags::all_on();
    c.flags.elastic = true;
    c.sim_time = true;
    const fs::path da = fresh_dir("det_a"), db = fresh_dir("det_b");
    c.out_dir = da;
    run_benchmark(s, t, c);
    c.out_dir = db;
    run_benchmark(s, t, c);
    const auto a = read_lines(da / "frames.csv");
    const auto b = read_lines(db / "frames.csv");
    ASSERT_EQ(a.size(), b.size());
    ASSERT_GT(a.size(), 1u);
    // Wall-clock columns: filter_ms .. total_ms (8..12).
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto fa = split(a[i]), fb = split(b[i]);
        ASSERT_EQ(fa.size(), 14u);
        for (std::size_t col : {0, 1, 2, 3, 4, 5, 6, 7, 13})
            EXPECT_EQ(fa[col], fb[col]) << "line " << i << " col " << col;
    }
}

TEST(Compare, RatiosAndMismatch) {
    MetricReport a;
    a.trajectory_fingerprint = 42;
    a.n_frames = 10;
    a.avg_fps = 20;
    a.p1_fps = 10;
    a.mean_total_ms = 50;
    a.mean_filter_ms = 1;
    a.mean_decode_ms = 20;
    a.mean_raster_ms = 29;
    for (const auto &row : compare_report(a, a))
        EXPECT_DOUBLE_EQ(row.ratio, 1.0) << row.metric;
    MetricReport b = a;
    b.avg_fps = 40;
    b.mean_total_ms = 25;
    const auto rows = compare_report(a, b);
    EXPECT_DOUBLE_EQ(rows[0].ratio, 2.0);
    EXPECT_DOUBLE_EQ(rows[2].ratio, 2.0);
    const auto j = compare_json(rows);
    EXPECT_DOUBLE_EQ(j["avg_fps"]["gain"].get<double>(), 2.0);
    EXPECT_NE(format_compare(rows).find("avg_fps"), std::string::npos);
    b.trajectory_fingerprint = 43;
    EXPECT_THROW(compare_report(a, b), InvalidArgument);
}

TEST(Ablation, GridRowsAndArtifacts) {
    const SceneModel s = test::small_scene(2, 800);
    const Trajectory t = generate_orbit_trajectory(test::small_orbit(3, 32));
    RunConfig c;
    c.out_dir = fresh_dir("ablate");
    const auto rows = ablate(s, t, c);
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[0].report.flags, RunFlags::all_on());
    EXPECT_DOUBLE_EQ(rows[0].speedup_loss, 1.0);
    EXPECT_FALSE(rows[1].report.flags.cache);
    EXPECT_FALSE(rows[2].report.flags.de_redundancy);
    EXPECT_FALSE(rows[3].report.flags.fast_kernels);
    EXPECT_EQ(rows[4].report.flags, RunFlags{});
    EXPECT_EQ(rows[2].report.filter_decode_passes, 6u);
    EXPECT_EQ(rows[0].report.filter_decode_passes, 3u);
    EXPECT_TRUE(fs::exists(c.out_dir / "ablation.csv"));
    EXPECT_TRUE(fs::exists(c.out_dir / "ablation.json"));
    EXPECT_TRUE(fs::exists(c.out_dir / "baseline" / "frames.csv"));
    EXPECT_EQ(read_lines(c.out_dir / "ablation.csv").size(), 6u);
}

TEST(Cli, ExitCodesAndArtifacts) {
    const fs::path dir = fresh_dir("cli");
    const std::string small = " --anchors 300 --frames 3 --width 32 --height-px 32";
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("run --bogus-flag"), 2);
    EXPECT_EQ(run_cli("run --dmax 0" + small + " --out " + (dir / "bad").string()), 2);
    EXPECT_EQ(run_cli("run --quality --elastic" + small), 2);
    EXPECT_EQ(run_cli("run --scene " + (dir / "missing.gsc").string() + small), 3);

    EXPECT_EQ(run_cli("gen-scene --anchors 300 --seed 4 --out " + dir.string()), 0);
    EXPECT_TRUE(fs::exists(dir / "scene.gsc"));
    EXPECT_EQ(run_cli("gen-traj --frames 3 --width 32 --height-px 32 --out " + dir.string()), 0);
    EXPECT_TRUE(fs::exists(dir / "trajectory.jsonl"));

    const std::string files = " --scene " + (dir / "scene.gsc").string() + " --traj " +
                              (dir / "trajectory.jsonl").string();
    EXPECT_EQ(run_cli("run --cache --dered --fast --quality" + files + " --out " +
                      (dir / "a").string()),
              0);
    EXPECT_EQ(run_cli("run" + files + " --out " + (dir / "b").string()), 0);
    EXPECT_EQ(read_lines(dir / "a" / "frames.csv").size(), 4u);
    EXPECT_TRUE(fs::exists(dir / "a" / "summary.json"));

    EXPECT_EQ(run_cli("compare " + (dir / "b").string() + " " + (dir / "a").string() + " --out " +
                      (dir / "cmp").string()),
              0);
    EXPECT_TRUE(fs::exists(dir / "cmp" / "compare.json"));

    EXPECT_EQ(run_cli("run --seed 9 --anchors 300 --frames 4 --width 32 --height-px 32 --out " +
                      (dir / "c").string()),
              0);
    EXPECT_EQ(run_cli("compare " + (dir / "b").string() + " " + (dir / "c").string()), 2);
    EXPECT_EQ(run_cli("compare " + (dir / "b").string() + " " + (dir / "nothing").string()), 2);

    std::ofstream(dir / "broken.gsc") << "XXXXgarbage";
    EXPECT_EQ(run_cli("run --scene " + (dir / "broken.gsc").string() + small), 2);
}
