#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>

#include "rolle/control.hpp"
#include "rolle/datalog.hpp"
#include "rolle/learning/model.hpp"
#include "rolle/perception.hpp"
#include "rolle/sim_drive.hpp"
#include "rolle/transport/frame_stream.hpp"

namespace rolle::autopilot {

struct AutopilotConfig {
  std::string model_path;
  double constant_throttle = 0.25;
  double fps = 32.0;
  bool telemetry = false;
  // Pace ticks on the wall clock; off for simulation in virtual time.
  bool realtime = false;
  std::size_t telemetry_queue = 8;
  perception::PreprocessConfig preprocess;
  // Throws ConfigError.
  void validate() const;
};

// Preprocess, forward, clamp to [-1, 1].
double predict_steering(const learning::Model<float>& m, const ImageFrame& raw,
                        const perception::PreprocessConfig& cfg = {});

// Bounded drop-oldest queue drained by a writer thread. push never blocks.
// If the sink throws, telemetry is disabled with a warning and later frames
// are discarded.
class TelemetryQueue {
 public:
  using Sink = std::function<void(const transport::TelemetryFrame&)>;
  TelemetryQueue(Sink sink, std::size_t capacity);
  ~TelemetryQueue();
  TelemetryQueue(const TelemetryQueue&) = delete;
  TelemetryQueue& operator=(const TelemetryQueue&) = delete;

  void push(transport::TelemetryFrame f);
  // Waits for queued frames to be written, then stops the writer.
  void close();

  std::uint64_t sent() const;
  std::uint64_t dropped() const;
  bool disabled() const;

 private:
  void run();
  Sink sink_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<transport::TelemetryFrame> queue_;
  bool closing_ = false;
  bool disabled_ = false;
  std::uint64_t sent_ = 0;
  std::uint64_t dropped_ = 0;
  std::thread writer_;
};

struct LoopStats {
  std::uint64_t ticks = 0;
  std::uint64_t skipped_ticks = 0;  // periods missed in realtime mode
  std::uint64_t telemetry_sent = 0;
  std::uint64_t telemetry_dropped = 0;
  bool telemetry_disabled = false;
};

using CommandApplier = std::function<void(const control::ControlCommand&)>;

// Runs until the source ends or stop is requested. Each tick: frame ->
// predict -> apply (steering, constant_throttle) -> optional telemetry. On
// exit a final command with throttle 0 is applied.
LoopStats autopilot_loop(datalog::FrameSource& frames, const learning::Model<float>& m,
                         const AutopilotConfig& cfg, const CommandApplier& apply,
                         const TelemetryQueue::Sink& telemetry = {}, std::stop_token stop = {});

struct EvalMetrics {
  double distance_m = 0.0;
  double off_path_fraction = 0.0;
  double mean_abs_steering = 0.0;
  // Mean signed distance left of the centerline (negative when right).
  double mean_left_offset_m = 0.0;
  std::uint64_t ticks = 0;
};

// Drives the rover from the track start pose in virtual time for
// round(duration * fps) ticks. The disturbance seed makes runs with noise
// reproducible; sigma 0 gives a noise-free run.
EvalMetrics closed_loop_eval(const sim::World& world, const learning::Model<float>& m,
                             const AutopilotConfig& cfg, double duration_s,
                             const sim_drive::RoverConfig& rover = {},
                             const sim_drive::DisturbanceParams& disturbance = {});

}  // namespace rolle::autopilot
