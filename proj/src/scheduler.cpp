// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#include "gscache/scheduler.hpp"

#include "gscache/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gscache {

void QueueConfig::validate() const {
    if (!(position_threshold >= 0.0) || !(angle_threshold_deg >= 0.0))
        throw InvalidArgument("queue: pose thresholds must be >= 0");
    if (capacity == 0)
        throw InvalidArgument("queue: capacity must be >= 1");
    if (!(timeout > 0.0))
        throw InvalidArgument("queue: timeout must be > 0");
}

double pose_translation(const StereoRig &a, const StereoRig &b) {
    return std::max(norm(a.left.position - b.left.position),
                    norm(a.right.position - b.right.position));
}

double pose_rotation_deg(const StereoRig &a, const StereoRig &b) {
    const double r = std::max(angle_between(a.left.rotation, b.left.rotation),
                              angle_between(a.right.rotation, b.right.rotation));
    return r * 180.0 / kPi;
}

CameraQueue::CameraQueue(QueueConfig config) : config_(config) { config_.validate(); }

bool CameraQueue::submit_pose(const StereoRig &rig, double now, std::size_t frame_index) {
    std::lock_guard lock(mutex_);
    if (last_ && pose_translation(rig, *last_) <= config_.position_threshold &&
        pose_rotation_deg(rig, *last_) <= config_.angle_threshold_deg) {
        ++rejected_;
        return false;
    }
    last_ = rig;
    if (entries_.size() >= config_.capacity) {
        entries_.pop_front();
        ++dropped_;
    }
    entries_.push_back({frame_index, rig, now});
    ++accepted_;
    return true;
}

std::optional<QueueEntry> CameraQueue::take_work(double now) {
    std::lock_guard lock(mutex_);
    while (!entries_.empty()) {
        QueueEntry e = std::move(entries_.front());
        entries_.pop_front();
        if (now - e.timestamp > config_.timeout) {
            ++expired_;
            continue;
        }
        return e;
    }
    return std::nullopt;
}

std::size_t CameraQueue::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}
std::size_t CameraQueue::accepted() const {
    std::lock_guard lock(mutex_);
    return accepted_;
}
std::size_t CameraQueue::rejected() const {
    std::lock_guard lock(mutex_);
    return rejected_;
}
std::size_t CameraQueue::dropped() const {
    std::lock_guard lock(mutex_);
    return dropped_;
}
std::size_t CameraQueue::expired() const {
    std::lock_guard lock(mutex_);
    return expired_;
}

const char *to_string(ControlAction action) {
    switch (action) {
    case ControlAction::StartWorker:
        return "start";
    case ControlAction::StopWorker:
        return "stop";
    default:
        return "none";
    }
}

void ControllerConfig::validate() const {
    if (!(min_fps >= 0.0) || !(max_fps >= min_fps))
        throw InvalidArgument("controller: need 0 <= min_fps <= max_fps");
    if (workers_max < 1)
        throw InvalidArgument("controller: workers_max must be >= 1");
    if (!(control_period > 0.0))
        throw InvalidArgument("controller: control period must be > 0");
}

FpsController::FpsController(ControllerConfig config, int initial_workers)
    : config_(config), n_(initial_workers) {
    config_.validate();
    if (initial_workers < 1 || initial_workers > config_.workers_max)
        throw InvalidArgument("controller: initial workers outside [1, workers_max]");
}

ControlAction FpsController::decide(double fps) const {
    if (fps < config_.min_fps && n_ < config_.workers_max)
        return ControlAction::StartWorker;
    if (fps > (1.0 + 1.0 / n_) * config_.max_fps && n_ > 1)
        return ControlAction::StopWorker;
    return ControlAction::None;
}

ControlAction FpsController::control_step(double fps, double now) {
    if (last_action_ && now - *last_action_ < config_.control_period * (1.0 - 1e-9))
        return ControlAction::None;
    const ControlAction a = decide(fps);
    if (a == ControlAction::StartWorker)
        ++n_;
    else if (a == ControlAction::StopWorker)
        --n_;
    if (a != ControlAction::None)
        last_action_ = now;
    return a;
}

bool DisplaySync::try_display(double timestamp) {
    std::lock_guard lock(mutex_);
    if (last_ && timestamp < *last_)
        return false;
    last_ = timestamp;
    return true;
}

std::optional<double> DisplaySync::last_written() const {
    std::lock_guard lock(mutex_);
    return last_;
}

void FpsMeter::add(double t) {
    times_.push_back(t);
    ++count_;
    while (times_.size() > window_ + 1)
        times_.pop_front();
}

double FpsMeter::fps(double now) const {
    if (times_.size() < 2)
        return 0.0;
    const double dt = now - times_.front();
    if (!(dt > 0.0))
        return std::numeric_limits<double>::infinity();
    return double(times_.size() - 1) / dt;
}

double count_cost_model(int, double, const FrameRecord &r) {
    return 1e-3 + 3e-6 * double(r.n_decoded) + 0.25e-6 * 2.0 * double(r.n_gaussians);
}

void SessionConfig::validate() const {
    queue.validate();
    controller.validate();
    if (initial_workers < 1 || initial_workers > controller.workers_max)
        throw InvalidArgument("session: initial workers outside [1, workers_max]");
    if (!(sample_interval >= 0.0))
        throw InvalidArgument("session: sample interval must be >= 0");
    if (fps_window < 1)
        throw InvalidArgument("session: fps window must be >= 1");
    if (pipeline.max_depth < 1)
        throw InvalidArgument("session: max depth must be >= 1");
}

} // namespace gscache
