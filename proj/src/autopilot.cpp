#include "rolle/autopilot.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "rolle/errors.hpp"

namespace rolle::autopilot {

void AutopilotConfig::validate() const {
  if (!(constant_throttle >= 0.0 && constant_throttle <= 1.0))
    throw ConfigError("constant_throttle must be in [0, 1]");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw ConfigError("fps must be positive");
  if (telemetry_queue == 0) throw ConfigError("telemetry queue needs room for one frame");
}

double predict_steering(const learning::Model<float>& m, const ImageFrame& raw,
                        const perception::PreprocessConfig& cfg) {
  const auto t = perception::preprocess(raw, cfg);
  learning::Batch<float> b;
  b.count = 1;
  b.data = t.values;
  const float y = learning::forward(m, b)[0];
  if (!std::isfinite(y)) return 0.0;
  return std::clamp(static_cast<double>(y), -1.0, 1.0);
}

TelemetryQueue::TelemetryQueue(Sink sink, std::size_t capacity)
    : sink_(std::move(sink)), capacity_(std::max<std::size_t>(capacity, 1)), writer_([this] { run(); }) {}

TelemetryQueue::~TelemetryQueue() { close(); }

void TelemetryQueue::push(transport::TelemetryFrame f) {
  {
    std::lock_guard lock(mu_);
    if (closing_ || disabled_) return;
    if (queue_.size() >= capacity_) {
      queue_.pop_front();
      ++dropped_;
    }
    queue_.push_back(std::move(f));
  }
  cv_.notify_one();
}

void TelemetryQueue::close() {
  {
    std::lock_guard lock(mu_);
    closing_ = true;
  }
  cv_.notify_all();
  if (writer_.joinable()) writer_.join();
}

std::uint64_t TelemetryQueue::sent() const {
  std::lock_guard lock(mu_);
  return sent_;
}

std::uint64_t TelemetryQueue::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

bool TelemetryQueue::disabled() const {
  std::lock_guard lock(mu_);
  return disabled_;
}

void TelemetryQueue::run() {
  for (;;) {
    transport::TelemetryFrame f;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return closing_ || !queue_.empty(); });
      if (queue_.empty()) return;
      f = std::move(queue_.front());
      queue_.pop_front();
    }
    try {
      sink_(f);
      std::lock_guard lock(mu_);
      ++sent_;
    } catch (const std::exception& e) {
      spdlog::warn("telemetry disabled: {}", e.what());
      std::lock_guard lock(mu_);
      disabled_ = true;
      dropped_ += queue_.size() + 1;
      queue_.clear();
    }
  }
}

LoopStats autopilot_loop(datalog::FrameSource& frames, const learning::Model<float>& m,
                         const AutopilotConfig& cfg, const CommandApplier& apply,
                         const TelemetryQueue::Sink& telemetry, std::stop_token stop) {
  cfg.validate();
  LoopStats stats;
  std::optional<TelemetryQueue> queue;
  if (cfg.telemetry && telemetry) queue.emplace(telemetry, cfg.telemetry_queue);
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / cfg.fps));
  auto due = clock::now();
  double last_steering = 0.0;
  while (!stop.stop_requested()) {
    auto frame = frames.next();
    if (!frame) break;
    const double steering = predict_steering(m, *frame, cfg.preprocess);
    last_steering = steering;
    apply(control::ControlCommand{steering, cfg.constant_throttle});
    if (queue) {
      transport::TelemetryFrame t;
      t.timestamp_ms = frame->timestamp_ms;
      t.steering = static_cast<float>(steering);
      t.throttle = static_cast<float>(cfg.constant_throttle);
      t.width = static_cast<std::uint32_t>(frame->width);
      t.height = static_cast<std::uint32_t>(frame->height);
      t.pixels = std::move(frame->pixels);
      queue->push(std::move(t));
    }
    ++stats.ticks;
    if (cfg.realtime) {
      due += period;
      const auto now = clock::now();
      if (now > due) {
        // Behind schedule: skip to the newest period instead of catching up.
        const auto missed = static_cast<std::uint64_t>((now - due) / period);
        stats.skipped_ticks += missed;
        due += period * static_cast<long>(missed);
      } else {
        std::this_thread::sleep_until(due);
      }
    }
  }
  apply(control::ControlCommand{last_steering, 0.0});
  if (queue) {
    queue->close();
    stats.telemetry_sent = queue->sent();
    stats.telemetry_dropped = queue->dropped();
    stats.telemetry_disabled = queue->disabled();
  }
  return stats;
}

EvalMetrics closed_loop_eval(const sim::World& world, const learning::Model<float>& m,
                             const AutopilotConfig& cfg, double duration_s,
                             const sim_drive::RoverConfig& rover_cfg,
                             const sim_drive::DisturbanceParams& disturbance) {
  if (!(duration_s > 0.0)) throw ConfigError("eval duration must be positive");
  sim_drive::RoverConfig rc = rover_cfg;
  rc.fps = cfg.fps;
  sim_drive::SimRover rover(world, rc, disturbance);
  control::ControlCommand current;
  EvalMetrics out;
  std::uint64_t off = 0;
  double abs_steer = 0.0;
  double last_abs = 0.0;
  double left = 0.0;
  sim_drive::SimFrameSource source(
      rover, sim_drive::frame_count(duration_s, cfg.fps), [&] { return current; },
      [&](const sim_drive::SimRover& r) {
        if (sim::off_path(r.world(), r.state())) ++off;
        left -= r.world().project({r.state().x, r.state().y}).signed_offset;
      });
  AutopilotConfig run_cfg = cfg;
  run_cfg.telemetry = false;
  run_cfg.realtime = false;
  const auto stats = autopilot_loop(
      source, m, run_cfg, [&](const control::ControlCommand& c) {
        current = c;
        abs_steer += std::abs(c.steering);
        last_abs = std::abs(c.steering);
      });
  abs_steer -= last_abs;  // the shutdown command is not a driving tick
  out.ticks = stats.ticks;
  out.distance_m = rover.distance();
  if (stats.ticks > 0) {
    const double n = static_cast<double>(stats.ticks);
    out.off_path_fraction = static_cast<double>(off) / n;
    out.mean_abs_steering = abs_steer / n;
    out.mean_left_offset_m = left / n;
  }
  return out;
}

}  // namespace rolle::autopilot
