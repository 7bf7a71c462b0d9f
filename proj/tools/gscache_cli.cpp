// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
// gscache command line: scene/trajectory generation, benchmark runs,
// ablation grids and run comparison.
//
#include "gscache/errors.hpp"
#include "gscache/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace gscache;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct SceneArgs {
    std::string scene_path;
    std::uint32_t anchors = 20000;
};

struct TrajArgs {
    std::string traj_path;
    std::size_t frames = 200;
    double radius = 30.0;
    double height = 12.0;
    double sweep_deg = 360.0;
    int width = 256;
    int height_px = 256;
    double ipd = 0.064;
    double fov_deg = 60.0;
    double dt = 1.0 / 60.0;
};

void add_scene_options(CLI::App *app, SceneArgs &a) {
    app->add_option("--scene", a.scene_path, "Scene file (generated from --seed when omitted)");
    app->add_option("--anchors", a.anchors, "Anchor count for generated scenes")
        ->check(CLI::PositiveNumber);
}

void add_traj_options(CLI::App *app, TrajArgs &t) {
    app->add_option("--frames", t.frames, "Orbit frame count")->check(CLI::PositiveNumber);
    app->add_option("--radius", t.radius, "Orbit radius")->check(CLI::PositiveNumber);
    app->add_option("--height", t.height, "Eye height above the orbit centre");
    app->add_option("--sweep-deg", t.sweep_deg, "Swept azimuth in degrees");
    app->add_option("--width", t.width, "Image width")->check(CLI::PositiveNumber);
    app->add_option("--height-px", t.height_px, "Image height")->check(CLI::PositiveNumber);
    app->add_option("--ipd", t.ipd, "Eye separation")->check(CLI::NonNegativeNumber);
    app->add_option("--fov", t.fov_deg, "Vertical field of view, degrees")
        ->check(CLI::Range(1.0, 179.0));
    app->add_option("--dt", t.dt, "Seconds between poses")->check(CLI::PositiveNumber);
}

SceneModel make_scene(const SceneArgs &a, std::uint64_t seed) {
    if (!a.scene_path.empty())
        return load_scene(a.scene_path);
    SceneParams p;
    p.seed = seed;
    p.n_anchors = a.anchors;
    return generate_synthetic_scene(p);
}

Trajectory make_trajectory(const TrajArgs &t) {
    if (!t.traj_path.empty())
        return load_trajectory(t.traj_path);
    OrbitParams o;
    o.n_frames = t.frames;
    o.radius = t.radius;
    o.height_start = o.height_end = t.height;
    o.sweep = t.sweep_deg * kPi / 180.0;
    o.width = t.width;
    o.height = t.height_px;
    o.ipd = t.ipd;
    o.fov_y = t.fov_deg * kPi / 180.0;
    o.frame_dt = t.dt;
    return generate_orbit_trajectory(o);
}

void add_run_options(CLI::App *app, RunConfig &c, std::string &out) {
    app->add_flag("--cache", c.flags.cache, "Enable the computation cache");
    app->add_flag("--dered", c.flags.de_redundancy, "Enable binocular de-redundancy");
    app->add_flag("--fast", c.flags.fast_kernels, "Use the parallel kernels");
    app->add_flag("--elastic", c.flags.elastic, "Elastic multi-worker scheduling");
    app->add_option("--dmax", c.max_depth, "Maximum reuse depth");
    app->add_option("--min-fps", c.min_fps, "Lower FPS bound for the controller");
    app->add_option("--max-fps", c.max_fps, "Upper FPS bound for the controller");
    app->add_option("--workers-max", c.workers_max, "Worker pool limit");
    app->add_flag("--sim-time", c.sim_time, "Simulated clock for elastic sessions");
    app->add_flag("--check", c.check_conservation, "Assert blending conservation per pixel");
    app->add_option("--out", out, "Output directory");
}

void print_summary(const MetricReport &r) {
    std::cout << r.label << ": " << r.n_frames << " frames, avg " << r.avg_fps << " fps, p1 "
              << r.p1_fps << " fps, decode " << r.mean_decode_ms << " ms, raster "
              << r.mean_raster_ms << " ms";
    if (!r.per_frame.empty())
        std::cout << ", psnr mean " << r.mean_psnr << " dB min " << r.min_psnr << " dB, ssim min "
                  << r.min_ssim;
    std::cout << '\n';
}

MetricReport load_summary(const fs::path &dir) {
    const fs::path p = fs::is_directory(dir) ? dir / "summary.json" : dir;
    std::ifstream in(p);
    if (!in)
        throw InvalidArgument("cannot read " + p.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw InvalidArgument(p.string() + ": " + e.what());
    }
    return report_from_json(j);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"gscache: cached binocular Gaussian rendering benchmark"};
    app.require_subcommand(1);
    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "Seed for generated scenes")->capture_default_str();

    // gen-scene
    auto *gen_scene = app.add_subcommand("gen-scene", "Generate a synthetic scene file");
    SceneParams sp;
    std::string gs_out = ".";
    gen_scene->add_option("--anchors", sp.n_anchors, "Anchor count")->check(CLI::PositiveNumber);
    gen_scene->add_option("--lod-levels", sp.lod_levels, "LoD levels")->check(CLI::PositiveNumber);
    gen_scene->add_option("--gaussians", sp.gaussians_per_anchor, "Gaussians per anchor")
        ->check(CLI::PositiveNumber);
    gen_scene->add_option("--seed", seed, "Generator seed");
    gen_scene->add_option("--out", gs_out, "Output directory");

    // gen-traj
    auto *gen_traj = app.add_subcommand("gen-traj", "Generate an orbit trajectory");
    TrajArgs gt;
    std::string gt_out = ".";
    add_traj_options(gen_traj, gt);
    gen_traj->add_option("--out", gt_out, "Output directory");

    // run
    auto *run = app.add_subcommand("run", "Render a trajectory and write frames.csv/summary.json");
    RunConfig rc;
    SceneArgs rs;
    TrajArgs rt;
    std::string run_out = "run_out";
    add_scene_options(run, rs);
    add_traj_options(run, rt);
    run->add_option("--traj", rt.traj_path, "Trajectory file (orbit generated when omitted)");
    add_run_options(run, rc, run_out);
    run->add_option("--seed", seed, "Generator seed");
    run->add_flag("--quality", rc.quality, "Compare against the all-off baseline");
    run->add_option("--png-every", rc.png_every, "Write PNG frames every N frames");

    // ablate
    auto *abl = app.add_subcommand("ablate", "All-on vs single-flag-off ablation grid");
    RunConfig ac;
    SceneArgs as;
    TrajArgs at;
    std::string abl_out = "ablate_out";
    add_scene_options(abl, as);
    add_traj_options(abl, at);
    abl->add_option("--traj", at.traj_path, "Trajectory file (orbit generated when omitted)");
    add_run_options(abl, ac, abl_out);
    abl->add_option("--seed", seed, "Generator seed");

    // compare
    auto *cmp = app.add_subcommand("compare", "Speedup table between two runs");
    std::string cmp_a, cmp_b, cmp_out;
    cmp->add_option("run_a", cmp_a, "Run directory or summary.json (reference)")->required();
    cmp->add_option("run_b", cmp_b, "Run directory or summary.json (candidate)")->required();
    cmp->add_option("--out", cmp_out, "Write compare.txt and compare.json here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*gen_scene) {
            sp.seed = seed;
            const SceneModel scene = generate_synthetic_scene(sp);
            fs::create_directories(gs_out);
            const fs::path p = fs::path(gs_out) / "scene.gsc";
            save_scene(scene, p);
            std::cout << "wrote " << p.string() << " (" << scene.size() << " anchors)\n";
        } else if (*gen_traj) {
            const Trajectory t = make_trajectory(gt);
            fs::create_directories(gt_out);
            const fs::path p = fs::path(gt_out) / "trajectory.jsonl";
            save_trajectory(t, p);
            std::cout << "wrote " << p.string() << " (" << t.frames.size() << " frames)\n";
        } else if (*run) {
            rc.out_dir = run_out;
            rc.validate();
            const SceneModel scene = make_scene(rs, seed);
            const Trajectory traj = make_trajectory(rt);
            print_summary(run_benchmark(scene, traj, rc));
        } else if (*abl) {
            ac.out_dir = abl_out;
            ac.flags.elastic = false;
            ac.validate();
            const SceneModel scene = make_scene(as, seed);
            const Trajectory traj = make_trajectory(at);
            for (const auto &row : ablate(scene, traj, ac)) {
                print_summary(row.report);
                std::cout << "  speedup loss vs all-on: " << row.speedup_loss << '\n';
            }
        } else if (*cmp) {
            const auto rows = compare_report(load_summary(cmp_a), load_summary(cmp_b));
            std::cout << format_compare(rows);
            if (!cmp_out.empty()) {
                fs::create_directories(cmp_out);
                std::ofstream(fs::path(cmp_out) / "compare.txt") << format_compare(rows);
                std::ofstream(fs::path(cmp_out) / "compare.json") << compare_json(rows).dump(2)
                                                                  << '\n';
            }
        }
    } catch (const InvalidArgument &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const FormatError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception &e) {
        std::cerr << "runtime failure: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
