// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#include "gscache/errors.hpp"
#include "gscache/metrics.hpp"
#include "gscache/scheduler.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>

namespace gscache {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> pose_times(const Trajectory &traj, double sample_interval) {
    std::vector<double> t(traj.frames.size());
    for (std::size_t k = 0; k < t.size(); ++k)
        t[k] = sample_interval > 0.0 ? double(k) * sample_interval
                                     : traj.frames[k].timestamp - traj.frames[0].timestamp;
    return t;
}

FrameRecord start_frame(StereoPipeline *pipeline, const QueueEntry &entry, int worker,
                        double now) {
    FrameRecord rec = pipeline ? pipeline->render(entry.rig).record : FrameRecord{};
    rec.frame_id = entry.frame_index;
    rec.timestamp = entry.timestamp;
    rec.worker_id = worker;
    rec.render_start = now;
    return rec;
}

void record_display(SessionReport &report, FpsMeter &meter, DisplaySync &sync, FrameRecord rec,
                    double now) {
    rec.render_end = now;
    rec.displayed = sync.try_display(rec.timestamp);
    if (rec.displayed) {
        meter.add(now);
        report.display_times.push_back(now);
        report.display_timestamps.push_back(rec.timestamp);
    }
    report.records.push_back(std::move(rec));
}

void note_workers(SessionReport &report, int n) {
    report.max_workers_seen = std::max(report.max_workers_seen, n);
    report.min_workers_seen = report.min_workers_seen == 0 ? n : std::min(report.min_workers_seen, n);
}

// ---------------------------------------------------------------------------
// Simulated time

struct SimWorker {
    bool active = false;
    bool busy = false;
    bool retiring = false;
    double busy_until = kInf;
    FrameRecord record;
    std::unique_ptr<StereoPipeline> pipeline;
};

SessionReport run_simulated(const SceneModel &scene, const Trajectory &traj,
                            const SessionConfig &cfg) {
    SessionReport report;
    const CostModel cost = cfg.cost ? cfg.cost : CostModel(count_cost_model);
    const std::vector<double> times = pose_times(traj, cfg.sample_interval);
    CameraQueue queue(cfg.queue);
    FpsController controller(cfg.controller, cfg.initial_workers);
    DisplaySync sync;
    FpsMeter meter(cfg.fps_window);
    std::vector<SimWorker> workers(static_cast<std::size_t>(cfg.controller.workers_max));
    std::vector<int> started; // LIFO stop order
    std::size_t memory = 0;

    auto activate = [&](int id) {
        SimWorker &w = workers[static_cast<std::size_t>(id)];
        w.active = true;
        w.retiring = false;
        if (cfg.render_frames)
            w.pipeline = std::make_unique<StereoPipeline>(scene, cfg.pipeline);
        started.push_back(id);
    };
    auto retire = [&](SimWorker &w) {
        if (w.pipeline)
            memory += w.pipeline->peak_memory_bytes();
        w.pipeline.reset();
        w.active = false;
        w.retiring = false;
    };
    for (int i = 0; i < cfg.initial_workers; ++i)
        activate(i);
    note_workers(report, controller.n_workers());
    report.worker_timeline.push_back({0.0, controller.n_workers(), ControlAction::None, 0.0});

    std::size_t k = 0;
    double next_tick = cfg.elastic ? cfg.controller.control_period : kInf;
    double now = 0.0;
    for (;;) {
        int done = -1;
        double t_done = kInf;
        for (std::size_t i = 0; i < workers.size(); ++i)
            if (workers[i].busy && workers[i].busy_until < t_done) {
                t_done = workers[i].busy_until;
                done = static_cast<int>(i);
            }
        const double t_pose = k < times.size() ? times[k] : kInf;
        if (done < 0 && k >= times.size())
            break;

        if (done >= 0 && t_done <= t_pose && t_done <= next_tick) {
            now = t_done;
            SimWorker &w = workers[static_cast<std::size_t>(done)];
            w.busy = false;
            w.busy_until = kInf;
            record_display(report, meter, sync, std::move(w.record), now);
            if (w.retiring)
                retire(w);
        } else if (t_pose <= next_tick) {
            now = t_pose;
            if (queue.submit_pose(traj.frames[k].rig, now, k))
                ++report.submitted;
            ++k;
        } else {
            now = next_tick;
            next_tick += cfg.controller.control_period;
            const double fps = meter.fps(now);
            const ControlAction a = controller.control_step(fps, now);
            if (a == ControlAction::StartWorker) {
                for (std::size_t i = 0; i < workers.size(); ++i)
                    if (!workers[i].active && !workers[i].busy) {
                        activate(static_cast<int>(i));
                        break;
                    }
            } else if (a == ControlAction::StopWorker) {
                SimWorker &w = workers[static_cast<std::size_t>(started.back())];
                started.pop_back();
                if (w.busy)
                    w.retiring = true;
                else
                    retire(w);
            }
            if (static_cast<int>(started.size()) != controller.n_workers())
                throw ConsistencyError("session: worker pool out of sync with the controller");
            note_workers(report, controller.n_workers());
            report.worker_timeline.push_back({now, controller.n_workers(), a, fps});
        }

        for (std::size_t i = 0; i < workers.size(); ++i) {
            SimWorker &w = workers[i];
            if (!w.active || w.busy || w.retiring)
                continue;
            auto entry = queue.take_work(now);
            if (!entry)
                break;
            const int id = static_cast<int>(i);
            w.record = start_frame(w.pipeline.get(), *entry, id, now);
            const double c = cost(id, now, w.record);
            if (!(c >= 0.0) || !std::isfinite(c))
                throw InvalidArgument("session: cost model returned " + std::to_string(c));
            w.busy = true;
            w.busy_until = now + c;
            ++report.rendered;
        }
    }
    for (auto &w : workers)
        if (w.pipeline)
            memory += w.pipeline->peak_memory_bytes();
    report.peak_memory_bytes = memory;
    report.duration = now;
    report.rejected = queue.rejected();
    report.dropped = queue.dropped();
    report.expired = queue.expired();
    return report;
}

// ---------------------------------------------------------------------------
// Real time

struct ThreadSlot {
    std::thread thread;
    std::atomic<bool> stop{false};
    std::atomic<bool> running{false};
    std::atomic<bool> busy{false};
    std::size_t memory = 0;
};

SessionReport run_realtime(const SceneModel &scene, const Trajectory &traj,
                           const SessionConfig &cfg) {
    using Clock = std::chrono::steady_clock;
    SessionReport report;
    const CostModel cost = cfg.cost ? cfg.cost : CostModel(count_cost_model);
    const std::vector<double> times = pose_times(traj, cfg.sample_interval);
    CameraQueue queue(cfg.queue);
    FpsController controller(cfg.controller, cfg.initial_workers);
    DisplaySync sync;
    FpsMeter meter(cfg.fps_window);
    std::mutex report_mutex;
    std::atomic<bool> abort{false};
    std::exception_ptr failure;
    std::vector<std::unique_ptr<ThreadSlot>> slots;
    for (int i = 0; i < cfg.controller.workers_max; ++i)
        slots.push_back(std::make_unique<ThreadSlot>());
    std::vector<int> started;

    const auto t0 = Clock::now();
    auto clock = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

    auto worker_main = [&](int id) {
        ThreadSlot &slot = *slots[static_cast<std::size_t>(id)];
        try {
            std::unique_ptr<StereoPipeline> pipeline;
            if (cfg.render_frames)
                pipeline = std::make_unique<StereoPipeline>(scene, cfg.pipeline);
            while (!slot.stop && !abort) {
                slot.busy = true;
                auto entry = queue.take_work(clock());
                if (!entry) {
                    slot.busy = false;
                    std::this_thread::sleep_for(std::chrono::microseconds(200));
                    continue;
                }
                FrameRecord rec = start_frame(pipeline.get(), *entry, id, clock());
                if (!cfg.render_frames)
                    std::this_thread::sleep_for(
                        std::chrono::duration<double>(cost(id, rec.render_start, rec)));
                {
                    std::lock_guard lock(report_mutex);
                    ++report.rendered;
                    record_display(report, meter, sync, std::move(rec), clock());
                }
                slot.busy = false;
            }
            if (pipeline)
                slot.memory += pipeline->peak_memory_bytes();
        } catch (...) {
            std::lock_guard lock(report_mutex);
            if (!failure)
                failure = std::current_exception();
            abort = true;
        }
        slot.busy = false;
        slot.running = false;
    };
    auto start = [&](int id) {
        ThreadSlot &slot = *slots[static_cast<std::size_t>(id)];
        if (slot.thread.joinable())
            slot.thread.join();
        slot.stop = false;
        slot.running = true;
        slot.thread = std::thread(worker_main, id);
        started.push_back(id);
    };

    for (int i = 0; i < cfg.initial_workers; ++i)
        start(i);
    note_workers(report, controller.n_workers());
    report.worker_timeline.push_back({0.0, controller.n_workers(), ControlAction::None, 0.0});

    auto sleep_until = [&](double t) {
        std::this_thread::sleep_until(t0 + std::chrono::duration_cast<Clock::duration>(
                                               std::chrono::duration<double>(t)));
    };
    double next_tick = cfg.elastic ? cfg.controller.control_period : kInf;
    auto control = [&](double now) {
        double fps;
        {
            std::lock_guard lock(report_mutex);
            fps = meter.fps(now);
        }
        const ControlAction a = controller.control_step(fps, now);
        if (a == ControlAction::StartWorker) {
            for (std::size_t i = 0; i < slots.size(); ++i)
                if (!slots[i]->running) {
                    start(static_cast<int>(i));
                    break;
                }
        } else if (a == ControlAction::StopWorker) {
            slots[static_cast<std::size_t>(started.back())]->stop = true;
            started.pop_back();
        }
        std::lock_guard lock(report_mutex);
        note_workers(report, controller.n_workers());
        report.worker_timeline.push_back({now, controller.n_workers(), a, fps});
    };

    std::size_t k = 0;
    while (k < times.size() && !abort) {
        if (next_tick < times[k]) {
            sleep_until(next_tick);
            control(next_tick);
            next_tick += cfg.controller.control_period;
            continue;
        }
        sleep_until(times[k]);
        if (queue.submit_pose(traj.frames[k].rig, clock(), k))
            ++report.submitted;
        ++k;
    }
    // Drain: wait for the queue to empty and every worker to go idle.
    while (!abort) {
        bool idle = queue.empty();
        for (const auto &s : slots)
            idle = idle && !s->busy;
        if (idle)
            break;
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    for (auto &s : slots)
        s->stop = true;
    for (auto &s : slots)
        if (s->thread.joinable())
            s->thread.join();
    if (failure) {
        try {
            std::rethrow_exception(failure);
        } catch (const std::exception &e) {
            throw std::runtime_error(std::string("session aborted: worker failed: ") + e.what());
        }
    }
    for (const auto &s : slots)
        report.peak_memory_bytes += s->memory;
    report.duration = clock();
    report.rejected = queue.rejected();
    report.dropped = queue.dropped();
    report.expired = queue.expired();
    return report;
}

} // namespace

void finalize_fps(SessionReport &report) {
    report.displayed = 0;
    for (const auto &r : report.records)
        report.displayed += r.displayed ? 1 : 0;
    report.discarded = report.records.size() - report.displayed;
    report.fps_series.clear();
    const auto &t = report.display_times;
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] > t[i - 1])
            report.fps_series.push_back(1.0 / (t[i] - t[i - 1]));
    report.avg_fps = t.size() >= 2 && t.back() > t.front()
                         ? double(t.size() - 1) / (t.back() - t.front())
                         : 0.0;
    report.p1_fps = percentile(report.fps_series, 1.0);
}

SessionReport run_session(const SceneModel &scene, const Trajectory &trajectory,
                          const SessionConfig &config) {
    config.validate();
    trajectory.validate();
    SessionReport report = config.clock == ClockMode::Simulated
                               ? run_simulated(scene, trajectory, config)
                               : run_realtime(scene, trajectory, config);
    finalize_fps(report);
    return report;
}

} // namespace gscache
