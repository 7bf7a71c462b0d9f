// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
// Elastic parallel rendering: shared camera queue, FPS-driven worker
// controller, display-order synchronization and the session driver.
//
#pragma once

#include "gscache/scene.hpp"
#include "gscache/stereo.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <vector>

namespace gscache {

struct QueueConfig {
    double position_threshold = 0.01;  ///< world units
    double angle_threshold_deg = 0.5;
    std::size_t capacity = 8;
    double timeout = 0.1;              ///< seconds

    void validate() const;
};

struct QueueEntry {
    std::size_t frame_index = 0; ///< trajectory frame the pose came from
    StereoRig rig;
    double timestamp = 0.0;
};

/// Thread-safe FIFO of timestamped poses.
class CameraQueue {
  public:
    explicit CameraQueue(QueueConfig config = {});

    /// Enqueues the pose if it moved more than the thresholds since the last
    /// accepted pose (largest change over the two eyes). Drops the oldest
    /// entry when full.
    bool submit_pose(const StereoRig &rig, double now, std::size_t frame_index = 0);

    /// Pops from the head, discarding entries with now - timestamp > timeout.
    std::optional<QueueEntry> take_work(double now);

    std::size_t size() const;
    bool empty() const { return size() == 0; }
    std::size_t accepted() const;
    std::size_t rejected() const;
    std::size_t dropped() const;   ///< overflow
    std::size_t expired() const;   ///< discarded by timeout
    const QueueConfig &config() const { return config_; }

  private:
    QueueConfig config_;
    mutable std::mutex mutex_;
    std::deque<QueueEntry> entries_;
    std::optional<StereoRig> last_;
    std::size_t accepted_ = 0, rejected_ = 0, dropped_ = 0, expired_ = 0;
};

/// Largest eye displacement and rotation angle (degrees) between two rigs.
double pose_translation(const StereoRig &a, const StereoRig &b);
double pose_rotation_deg(const StereoRig &a, const StereoRig &b);

enum class ControlAction { None, StartWorker, StopWorker };

const char *to_string(ControlAction action);

struct ControllerConfig {
    double min_fps = 60.0;
    double max_fps = 120.0;
    int workers_max = 2;
    double control_period = 0.5; ///< seconds; at most one action per period

    void validate() const;
};

class FpsController {
  public:
    explicit FpsController(ControllerConfig config, int initial_workers = 1);

    /// Rule only, no state change:
    ///   StartWorker if fps < min and n < W_max
    ///   StopWorker  if fps > (1 + 1/n) max and n > 1
    ControlAction decide(double measured_fps) const;

    /// Applies decide() and updates the worker count, unless an action was
    /// taken less than one control period before `now`.
    ControlAction control_step(double measured_fps, double now);

    int n_workers() const { return n_; }
    const ControllerConfig &config() const { return config_; }

  private:
    ControllerConfig config_;
    int n_;
    std::optional<double> last_action_;
};

/// Display ordering point. try_display is linearizable.
class DisplaySync {
  public:
    /// Writes the frame unless its timestamp is older than the last written
    /// one; equal timestamps are written.
    bool try_display(double timestamp);
    std::optional<double> last_written() const;

  private:
    mutable std::mutex mutex_;
    std::optional<double> last_;
};

/// FPS over the most recent `window` display intervals:
/// k / (now - t_{n-k-1}).
class FpsMeter {
  public:
    explicit FpsMeter(std::size_t window = 30) : window_(window) {}
    void add(double display_time);
    double fps(double now) const;
    std::size_t count() const { return count_; }

  private:
    std::size_t window_;
    std::deque<double> times_;
    std::size_t count_ = 0;
};

/// Simulated seconds a worker spends on a frame. The record holds the
/// frame's counts (and wall timings when frames are really rendered).
using CostModel = std::function<double(int worker_id, double start_time, const FrameRecord &)>;

/// Deterministic cost from work counts: 1 ms + 3 us per decoded anchor +
/// 0.25 us per splat per eye.
double count_cost_model(int worker_id, double start_time, const FrameRecord &record);

enum class ClockMode { Simulated, RealTime };

struct SessionConfig {
    ClockMode clock = ClockMode::Simulated;
    PipelineOptions pipeline;
    QueueConfig queue;
    ControllerConfig controller;
    bool elastic = true;      ///< run the controller; otherwise the pool stays fixed
    int initial_workers = 1;
    /// Pose sampling interval in seconds; 0 uses the trajectory timestamps.
    double sample_interval = 0.0;
    /// Render frames through the worker pipelines. When false only the cost
    /// model runs (simulated time) or the worker sleeps for it (real time).
    bool render_frames = true;
    CostModel cost;           ///< simulated mode; defaults to count_cost_model
    std::size_t fps_window = 30;

    void validate() const;
};

struct WorkerEvent {
    double time;
    int n_workers;
    ControlAction action;
    double measured_fps;
};

struct SessionReport {
    std::vector<FrameRecord> records;      ///< completion order
    std::vector<double> display_times;
    std::vector<double> display_timestamps;
    std::vector<double> fps_series;        ///< instantaneous FPS between displayed frames
    std::vector<WorkerEvent> worker_timeline;
    double avg_fps = 0.0;
    double p1_fps = 0.0;
    double duration = 0.0;
    std::size_t submitted = 0, rejected = 0, dropped = 0, expired = 0;
    std::size_t rendered = 0, displayed = 0, discarded = 0;
    int max_workers_seen = 0;
    int min_workers_seen = 0;
    std::size_t peak_memory_bytes = 0;
};

/// Drives the trajectory through the queue, a pool of workers each owning a
/// StereoPipeline, the controller and the display sync. The simulated mode
/// is single threaded and deterministic; the real-time mode runs one thread
/// per worker. A worker failure aborts the session with its diagnostic.
SessionReport run_session(const SceneModel &scene, const Trajectory &trajectory,
                          const SessionConfig &config);

/// avg = (n - 1) / (t_last - t_first); p1 = 1st percentile of the
/// instantaneous FPS series.
void finalize_fps(SessionReport &report);

} // namespace gscache
