// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#include "gscache/harness.hpp"

#include "gscache/errors.hpp"
#include "gscache/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace gscache {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

nlohmann::json number_or_sentinel(double v) {
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (std::isnan(v))
        return "nan";
    return v;
}

double number_from_json(const nlohmann::json &j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf")
            return kInf;
        if (s == "-inf")
            return -kInf;
        return std::numeric_limits<double>::quiet_NaN();
    }
    return j.get<double>();
}

double ratio(double num, double den) {
    if (den == 0.0)
        return num == 0.0 ? 1.0 : kInf;
    return num / den;
}

void write_text(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open " + path.string());
    out << text;
    if (!out)
        throw IoError("failed writing " + path.string());
}

FrameMetrics eye_metrics(const Image &test, const Image &ref) {
    const double m = mse(test, ref);
    return {m, psnr_from_mse(m), ssim(test, ref)};
}

void aggregate(MetricReport &r) {
    const auto n = static_cast<double>(std::max<std::size_t>(r.records.size(), 1));
    r.n_frames = r.records.size();
    r.mean_filter_ms = r.mean_decode_ms = r.mean_raster_ms = r.mean_total_ms = 0.0;
    r.mean_update_rate = 0.0;
    r.filter_decode_passes = r.displayed = 0;
    for (const auto &rec : r.records) {
        r.mean_filter_ms += rec.filter_ms / n;
        r.mean_decode_ms += rec.decode_ms / n;
        r.mean_raster_ms += (rec.raster_left_ms + rec.raster_right_ms) / n;
        r.mean_total_ms += rec.total_ms / n;
        r.mean_update_rate += rec.update_rate / n;
        r.filter_decode_passes += rec.filter_decode_passes;
        r.displayed += rec.displayed ? 1 : 0;
        r.conservation_ok = r.conservation_ok && rec.conservation_ok;
    }
    if (r.per_frame.empty())
        return;
    double sum_mse = 0.0, sum_psnr = 0.0, sum_ssim = 0.0;
    std::size_t finite = 0;
    r.max_mse = 0.0;
    r.min_psnr = kInf;
    r.min_ssim = kInf;
    for (const auto &m : r.per_frame) {
        sum_mse += m.mse;
        sum_ssim += m.ssim;
        r.max_mse = std::max(r.max_mse, m.mse);
        r.min_psnr = std::min(r.min_psnr, m.psnr);
        r.min_ssim = std::min(r.min_ssim, m.ssim);
        if (std::isfinite(m.psnr)) {
            sum_psnr += m.psnr;
            ++finite;
        }
    }
    const auto nf = static_cast<double>(r.per_frame.size());
    r.mean_mse = sum_mse / nf;
    r.mean_ssim = sum_ssim / nf;
    r.mean_psnr = finite ? sum_psnr / double(finite) : kInf;
}

void write_artifacts(const MetricReport &r, const std::filesystem::path &dir) {
    std::ofstream csv(dir / "frames.csv");
    if (!csv)
        throw IoError("cannot open " + (dir / "frames.csv").string());
    write_frames_csv(csv, r.records);
    write_text(dir / "summary.json", to_json(r).dump(2) + "\n");
}

} // namespace

std::string RunFlags::label() const {
    if (!cache && !de_redundancy && !fast_kernels)
        return elastic ? "baseline+elastic" : "baseline";
    std::string s;
    auto add = [&](bool on, const char *name) {
        if (on)
            s += (s.empty() ? "" : "+") + std::string(name);
    };
    add(cache, "cache");
    add(de_redundancy, "dered");
    add(fast_kernels, "fast");
    add(elastic, "elastic");
    return s;
}

void RunConfig::validate() const {
    if (max_depth < 1)
        throw InvalidArgument("--dmax must be >= 1");
    if (!(min_fps >= 0.0) || !(max_fps >= min_fps))
        throw InvalidArgument("need 0 <= --min-fps <= --max-fps");
    if (workers_max < 1)
        throw InvalidArgument("--workers-max must be >= 1");
    if (quality && flags.elastic)
        throw InvalidArgument("quality comparison needs elastic scheduling off");
    session().validate();
}

PipelineOptions RunConfig::pipeline() const {
    PipelineOptions o;
    o.cache = flags.cache;
    o.de_redundancy = flags.de_redundancy;
    o.fast_kernels = flags.fast_kernels;
    o.max_depth = max_depth;
    o.check_conservation = check_conservation;
    return o;
}

SessionConfig RunConfig::session() const {
    SessionConfig s;
    s.clock = sim_time ? ClockMode::Simulated : ClockMode::RealTime;
    s.pipeline = pipeline();
    s.controller.min_fps = min_fps;
    s.controller.max_fps = max_fps;
    s.controller.workers_max = workers_max;
    s.elastic = flags.elastic;
    return s;
}

nlohmann::json to_json(const MetricReport &r) {
    nlohmann::json j;
    j["label"] = r.label;
    j["flags"] = {{"cache", r.flags.cache},
                  {"dered", r.flags.de_redundancy},
                  {"fast", r.flags.fast_kernels},
                  {"elastic", r.flags.elastic}};
    j["dmax"] = r.max_depth;
    j["trajectory_fingerprint"] = r.trajectory_fingerprint;
    j["n_frames"] = r.n_frames;
    j["displayed"] = r.displayed;
    j["quality"] = {{"frames", r.per_frame.size()},
                    {"mean_mse", r.mean_mse},
                    {"max_mse", r.max_mse},
                    {"mean_psnr_db", number_or_sentinel(r.mean_psnr)},
                    {"min_psnr_db", number_or_sentinel(r.min_psnr)},
                    {"mean_ssim", r.mean_ssim},
                    {"min_ssim", number_or_sentinel(r.min_ssim)},
                    {"lpips", "n/a"}};
    j["timing"] = {{"avg_fps", number_or_sentinel(r.avg_fps)},
                   {"p1_fps", number_or_sentinel(r.p1_fps)},
                   {"mean_filter_ms", r.mean_filter_ms},
                   {"mean_decode_ms", r.mean_decode_ms},
                   {"mean_raster_ms", r.mean_raster_ms},
                   {"mean_total_ms", r.mean_total_ms}};
    j["mean_update_rate"] = r.mean_update_rate;
    j["filter_decode_passes"] = r.filter_decode_passes;
    j["peak_memory_bytes"] = r.peak_memory_bytes;
    j["conservation_ok"] = r.conservation_ok;
    return j;
}

MetricReport report_from_json(const nlohmann::json &j) {
    try {
        MetricReport r;
        r.label = j.at("label").get<std::string>();
        const auto &f = j.at("flags");
        r.flags = {f.at("cache").get<bool>(), f.at("dered").get<bool>(), f.at("fast").get<bool>(),
                   f.at("elastic").get<bool>()};
        r.max_depth = j.at("dmax").get<int>();
        r.trajectory_fingerprint = j.at("trajectory_fingerprint").get<std::uint64_t>();
        r.n_frames = j.at("n_frames").get<std::size_t>();
        r.displayed = j.at("displayed").get<std::size_t>();
        const auto &q = j.at("quality");
        r.mean_mse = q.at("mean_mse").get<double>();
        r.max_mse = q.at("max_mse").get<double>();
        r.mean_psnr = number_from_json(q.at("mean_psnr_db"));
        r.min_psnr = number_from_json(q.at("min_psnr_db"));
        r.mean_ssim = q.at("mean_ssim").get<double>();
        r.min_ssim = number_from_json(q.at("min_ssim"));
        const auto &t = j.at("timing");
        r.avg_fps = number_from_json(t.at("avg_fps"));
        r.p1_fps = number_from_json(t.at("p1_fps"));
        r.mean_filter_ms = t.at("mean_filter_ms").get<double>();
        r.mean_decode_ms = t.at("mean_decode_ms").get<double>();
        r.mean_raster_ms = t.at("mean_raster_ms").get<double>();
        r.mean_total_ms = t.at("mean_total_ms").get<double>();
        r.mean_update_rate = j.at("mean_update_rate").get<double>();
        r.filter_decode_passes = j.at("filter_decode_passes").get<std::size_t>();
        r.peak_memory_bytes = j.at("peak_memory_bytes").get<std::size_t>();
        r.conservation_ok = j.at("conservation_ok").get<bool>();
        return r;
    } catch (const nlohmann::json::exception &e) {
        throw InvalidArgument(std::string("summary.json: ") + e.what());
    }
}

void write_frames_csv(std::ostream &out, const std::vector<FrameRecord> &records) {
    out << kFramesCsvHeader << '\n';
    char buf[512];
    for (const auto &r : records) {
        std::snprintf(buf, sizeof buf,
                      "%zu,%.9f,%d,%zu,%zu,%.6f,%d,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%d\n", r.frame_id,
                      r.timestamp, r.worker_id, r.n_required, r.n_decoded, r.update_rate,
                      r.cache_depth, r.n_gaussians, r.filter_ms, r.decode_ms, r.raster_left_ms,
                      r.raster_right_ms, r.total_ms, r.displayed ? 1 : 0);
        out << buf;
    }
}

MetricReport run_benchmark(const SceneModel &scene, const Trajectory &trajectory,
                           const RunConfig &config) {
    config.validate();
    trajectory.validate();
    MetricReport report;
    report.flags = config.flags;
    report.label = config.flags.label();
    report.max_depth = config.max_depth;
    report.trajectory_fingerprint = trajectory.fingerprint();
    if (!config.out_dir.empty())
        std::filesystem::create_directories(config.out_dir);

    if (config.flags.elastic) {
        SessionReport s = run_session(scene, trajectory, config.session());
        report.records = std::move(s.records);
        report.avg_fps = s.avg_fps;
        report.p1_fps = s.p1_fps;
        report.peak_memory_bytes = s.peak_memory_bytes;
    } else {
        StereoPipeline pipeline(scene, config.pipeline());
        std::optional<StereoPipeline> baseline;
        if (config.quality) {
            PipelineOptions b;
            b.check_conservation = config.check_conservation;
            baseline.emplace(scene, b);
        }
        double clock = 0.0;
        std::vector<double> inst_fps;
        for (std::size_t k = 0; k < trajectory.frames.size(); ++k) {
            const auto &tf = trajectory.frames[k];
            StereoFrame frame = pipeline.render(tf.rig);
            FrameRecord rec = frame.record;
            rec.frame_id = k;
            rec.timestamp = tf.timestamp;
            rec.worker_id = 0;
            rec.displayed = true;
            rec.render_start = clock;
            clock += rec.total_ms / 1000.0;
            rec.render_end = clock;
            if (rec.total_ms > 0.0)
                inst_fps.push_back(1000.0 / rec.total_ms);
            if (baseline) {
                StereoFrame ref = baseline->render(tf.rig);
                const FrameMetrics l = eye_metrics(frame.left, ref.left);
                const FrameMetrics r = eye_metrics(frame.right, ref.right);
                report.per_frame.push_back({std::max(l.mse, r.mse), std::min(l.psnr, r.psnr),
                                            std::min(l.ssim, r.ssim)});
                report.conservation_ok = report.conservation_ok && ref.record.conservation_ok;
            }
            if (config.png_every > 0 && !config.out_dir.empty() && k % config.png_every == 0) {
                char name[64];
                std::snprintf(name, sizeof name, "frame_%05zu_left.png", k);
                write_png(frame.left, config.out_dir / name);
                std::snprintf(name, sizeof name, "frame_%05zu_right.png", k);
                write_png(frame.right, config.out_dir / name);
            }
            report.records.push_back(std::move(rec));
        }
        report.peak_memory_bytes = pipeline.peak_memory_bytes();
        report.p1_fps = percentile(inst_fps, 1.0);
    }
    aggregate(report);
    if (!config.flags.elastic)
        report.avg_fps = report.mean_total_ms > 0.0 ? 1000.0 / report.mean_total_ms : 0.0;
    if (!config.out_dir.empty())
        write_artifacts(report, config.out_dir);
    return report;
}

std::vector<AblationRow> ablate(const SceneModel &scene, const Trajectory &trajectory,
                                const RunConfig &base) {
    const RunFlags grid[] = {
        {true, true, true, false},
        {false, true, true, false},
        {true, false, true, false},
        {true, true, false, false},
        {false, false, false, false},
    };
    std::vector<AblationRow> rows;
    for (const RunFlags &f : grid) {
        RunConfig cfg = base;
        cfg.flags = f;
        cfg.quality = false;
        cfg.png_every = 0;
        if (!base.out_dir.empty())
            cfg.out_dir = base.out_dir / f.label();
        rows.push_back({run_benchmark(scene, trajectory, cfg), 1.0});
    }
    for (auto &row : rows)
        row.speedup_loss = ratio(row.report.mean_total_ms, rows.front().report.mean_total_ms);
    if (!base.out_dir.empty())
        write_ablation(rows, base.out_dir);
    return rows;
}

void write_ablation(const std::vector<AblationRow> &rows, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    std::ostringstream csv;
    csv << "label,cache,dered,fast,avg_fps,p1_fps,mean_total_ms,mean_decode_ms,mean_raster_ms,"
           "mean_update_rate,speedup_loss\n";
    nlohmann::json j = nlohmann::json::array();
    char buf[512];
    for (const auto &row : rows) {
        const MetricReport &r = row.report;
        std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%.4f,%.4f,%.6f,%.6f,%.6f,%.6f,%.4f\n",
                      r.label.c_str(), r.flags.cache, r.flags.de_redundancy, r.flags.fast_kernels,
                      r.avg_fps, r.p1_fps, r.mean_total_ms, r.mean_decode_ms, r.mean_raster_ms,
                      r.mean_update_rate, row.speedup_loss);
        csv << buf;
        nlohmann::json e = to_json(r);
        e["speedup_loss"] = number_or_sentinel(row.speedup_loss);
        j.push_back(std::move(e));
    }
    write_text(dir / "ablation.csv", csv.str());
    write_text(dir / "ablation.json", j.dump(2) + "\n");
}

std::vector<CompareRow> compare_report(const MetricReport &a, const MetricReport &b) {
    if (a.trajectory_fingerprint != b.trajectory_fingerprint || a.n_frames != b.n_frames)
        throw InvalidArgument("compare: runs used different trajectories");
    auto gain = [](const char *name, double x, double y) { return CompareRow{name, x, y, ratio(y, x)}; };
    auto speedup = [](const char *name, double x, double y) {
        return CompareRow{name, x, y, ratio(x, y)};
    };
    return {gain("avg_fps", a.avg_fps, b.avg_fps),
            gain("p1_fps", a.p1_fps, b.p1_fps),
            speedup("total_ms", a.mean_total_ms, b.mean_total_ms),
            speedup("filter_ms", a.mean_filter_ms, b.mean_filter_ms),
            speedup("decode_ms", a.mean_decode_ms, b.mean_decode_ms),
            speedup("raster_ms", a.mean_raster_ms, b.mean_raster_ms)};
}

std::string format_compare(const std::vector<CompareRow> &rows) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-12s %14s %14s %10s\n", "metric", "a", "b", "gain");
    out << buf;
    for (const auto &r : rows) {
        std::snprintf(buf, sizeof buf, "%-12s %14.4f %14.4f %10.3f\n", r.metric.c_str(), r.a, r.b,
                      r.ratio);
        out << buf;
    }
    return out.str();
}

nlohmann::json compare_json(const std::vector<CompareRow> &rows) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto &r : rows)
        j[r.metric] = {{"a", number_or_sentinel(r.a)},
                       {"b", number_or_sentinel(r.b)},
                       {"gain", number_or_sentinel(r.ratio)}};
    return j;
}

} // namespace gscache
