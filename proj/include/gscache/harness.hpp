// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
// Benchmark and quality harness: runs a flag set over a trajectory,
// optionally against the all-off baseline, and writes frames.csv and
// summary.json.
//
#pragma once

#include "gscache/metrics.hpp"
#include "gscache/scheduler.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace gscache {

struct RunFlags {
    bool cache = false;
    bool de_redundancy = false;
    bool fast_kernels = false;
    bool elastic = false;

    static RunFlags all_on() { return {true, true, true, false}; }
    std::string label() const;
    bool operator==(const RunFlags &) const = default;
};

struct RunConfig {
    RunFlags flags;
    int max_depth = 10;
    double min_fps = 60.0;
    double max_fps = 120.0;
    int workers_max = 2;
    bool sim_time = false;
    /// Render the all-off baseline alongside and record per-frame metrics.
    bool quality = false;
    bool check_conservation = false;
    /// Write left/right PNGs every `png_every` frames (0 = never).
    std::size_t png_every = 0;
    std::filesystem::path out_dir; ///< empty: no artifacts

    void validate() const;
    PipelineOptions pipeline() const;
    SessionConfig session() const;
};

/// Per frame, the worse of the two eyes.
struct FrameMetrics {
    double mse = 0.0;
    double psnr = 0.0;
    double ssim = 1.0;
};

struct MetricReport {
    std::string label;
    RunFlags flags;
    int max_depth = 10;
    std::uint64_t trajectory_fingerprint = 0;
    std::size_t n_frames = 0;

    std::vector<FrameMetrics> per_frame; ///< empty without a quality run
    double mean_mse = 0.0, max_mse = 0.0;
    double mean_psnr = 0.0, min_psnr = 0.0; ///< mean over finite values; inf when all identical
    double mean_ssim = 1.0, min_ssim = 1.0;

    double avg_fps = 0.0;
    double p1_fps = 0.0;
    double mean_filter_ms = 0.0;
    double mean_decode_ms = 0.0;
    double mean_raster_ms = 0.0; ///< both eyes
    double mean_total_ms = 0.0;
    double mean_update_rate = 0.0;
    std::size_t filter_decode_passes = 0;
    std::size_t displayed = 0;
    std::size_t peak_memory_bytes = 0;
    bool conservation_ok = true;

    std::vector<FrameRecord> records;
};

nlohmann::json to_json(const MetricReport &report);
/// Reads the aggregates back from a summary.json (records and per-frame
/// metrics are not restored).
MetricReport report_from_json(const nlohmann::json &j);

inline constexpr const char *kFramesCsvHeader =
    "frame_id,timestamp_s,worker_id,n_required_anchors,n_decoded_anchors,update_rate,"
    "cache_depth,n_gaussians,filter_ms,decode_ms,raster_left_ms,raster_right_ms,total_ms,"
    "displayed";

void write_frames_csv(std::ostream &out, const std::vector<FrameRecord> &records);

/// Renders the trajectory. With elastic off frames run in order on one
/// pipeline and FPS comes from measured frame times; with elastic on the
/// trajectory runs through run_session. Writes frames.csv and summary.json
/// (and PNGs) when out_dir is set.
MetricReport run_benchmark(const SceneModel &scene, const Trajectory &trajectory,
                           const RunConfig &config);

struct AblationRow {
    MetricReport report;
    double speedup_loss = 1.0; ///< row mean frame time / all-on mean frame time
};

/// All on, each of cache / de-redundancy / fast kernels off, all off.
/// Timing rows run sequentially with a single pipeline.
std::vector<AblationRow> ablate(const SceneModel &scene, const Trajectory &trajectory,
                                const RunConfig &base);
void write_ablation(const std::vector<AblationRow> &rows, const std::filesystem::path &out_dir);

struct CompareRow {
    std::string metric;
    double a = 0.0, b = 0.0;
    double ratio = 1.0; ///< gain of b over a
};

/// FPS rows are b/a, time rows a/b. Throws InvalidArgument when the runs
/// used different trajectories.
std::vector<CompareRow> compare_report(const MetricReport &a, const MetricReport &b);
std::string format_compare(const std::vector<CompareRow> &rows);
nlohmann::json compare_json(const std::vector<CompareRow> &rows);

} // namespace gscache
