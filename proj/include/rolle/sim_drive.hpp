#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>

#include "rolle/control.hpp"
#include "rolle/datalog.hpp"
#include "rolle/simworld.hpp"

namespace rolle::sim_drive {

struct RoverConfig {
  sim::VehicleParams vehicle;
  sim::CameraModel camera;
  int raw_width = 320;
  int raw_height = 240;
  double fps = 32.0;
  control::ChannelConfig steering_channel = control::default_steering_channel();
  control::ChannelConfig throttle_channel = control::default_throttle_channel();
  void validate() const;
};

// Ornstein-Uhlenbeck offset on the actuated wheel angle, e.g. servo trim
// drift and wheel slip. sigma is the stationary standard deviation in radians.
struct DisturbanceParams {
  double sigma = 0.0;
  double time_constant = 1.0;
  std::uint64_t seed = 0;
};

class SteeringDisturbance {
 public:
  explicit SteeringDisturbance(const DisturbanceParams& p);
  double step(double dt);
  double value() const { return x_; }

 private:
  DisturbanceParams p_;
  std::mt19937_64 rng_;
  double x_ = 0.0;
};

// Simulated rover: state, camera and actuation through the PWM duty path.
class SimRover {
 public:
  SimRover(sim::World world, const RoverConfig& cfg, const DisturbanceParams& disturbance = {});

  const sim::World& world() const { return world_; }
  const RoverConfig& config() const { return cfg_; }
  const sim::VehicleState& state() const { return state_; }
  std::uint64_t tick() const { return tick_; }
  // floor(tick * 1000 / fps)
  std::uint64_t timestamp_ms() const;
  double distance() const { return distance_; }

  ImageFrame capture() const;
  // Advances one tick of 1/fps seconds under cmd.
  void step(const control::ControlCommand& cmd);

 private:
  sim::World world_;
  RoverConfig cfg_;
  SteeringDisturbance disturbance_;
  sim::VehicleState state_;
  std::uint64_t tick_ = 0;
  double distance_ = 0.0;
};

// Frame source over a SimRover. Before each capture `before_capture` runs
// (a scripted driver publishes there); between captures the rover steps with
// whatever `command` returns, so the step uses the command paired with the
// previous frame.
class SimFrameSource : public datalog::FrameSource {
 public:
  SimFrameSource(SimRover& rover, std::size_t frames, std::function<control::ControlCommand()> command,
                 std::function<void(const SimRover&)> before_capture = {}, bool realtime = false);
  std::optional<ImageFrame> next() override;
  std::size_t produced() const { return produced_; }

 private:
  SimRover& rover_;
  std::size_t frames_;
  std::function<control::ControlCommand()> command_;
  std::function<void(const SimRover&)> before_capture_;
  bool realtime_;
  std::size_t produced_ = 0;
  std::chrono::steady_clock::time_point start_;
};

// Frame count for a duration at fps: round(duration * fps).
std::size_t frame_count(double duration_s, double fps);

class Driver {
 public:
  virtual ~Driver() = default;
  virtual control::ControlCommand command(const sim::World& w, const sim::VehicleState& s) = 0;
};

// Pure pursuit with a fixed throttle.
class OracleDriver : public Driver {
 public:
  OracleDriver(double lookahead = 0.4, double throttle = 0.25, sim::VehicleParams p = {})
      : lookahead_(lookahead), throttle_(throttle), params_(p) {}
  control::ControlCommand command(const sim::World& w, const sim::VehicleState& s) override;

 private:
  double lookahead_, throttle_;
  sim::VehicleParams params_;
};

// Left-favouring driver that keeps to the left of the path. Pure pursuit
// toward a line `lane_offset` metres left of the centerline; past
// `threshold` a left request becomes full left lock, a right request is
// passed through, and anything smaller is straight.
class LeftBiasedDriver : public Driver {
 public:
  LeftBiasedDriver(double lookahead = 0.4, double throttle = 0.25, double threshold = 0.3,
                   double lane_offset = 0.08, sim::VehicleParams p = {})
      : lookahead_(lookahead), throttle_(throttle), threshold_(threshold), lane_offset_(lane_offset), params_(p) {}
  control::ControlCommand command(const sim::World& w, const sim::VehicleState& s) override;

 private:
  double lookahead_, throttle_, threshold_, lane_offset_;
  sim::VehicleParams params_;
};

}  // namespace rolle::sim_drive
