#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <stop_token>
#include <string_view>

#include "rolle/latest_value.hpp"
#include "rolle/simworld.hpp"
#include "rolle/transport/mqtt_client.hpp"

namespace rolle::control {

// Normalized motor command; -1 steering is full left, +1 full right.
struct ControlCommand {
  double steering = 0.0;
  double throttle = 0.0;
  ControlCommand clamped() const;
  friend bool operator==(const ControlCommand&, const ControlCommand&) = default;
};

enum class Channel { steering, throttle };

// PWM duty range for one channel, in 12-bit counts at 50 Hz.
struct ChannelConfig {
  int min_duty = 205;
  int max_duty = 410;
  Channel channel = Channel::steering;
  // Throws ConfigError unless 0 <= min_duty < max_duty <= 4095.
  void validate() const;
};

inline ChannelConfig default_steering_channel() { return {205, 410, Channel::steering}; }
inline ChannelConfig default_throttle_channel() { return {205, 410, Channel::throttle}; }

// Linear remap of [-1, 1] onto [min_duty, max_duty], rounding half up.
// Out-of-range values are clamped; NaN/inf throws NumericInputError.
int command_to_duty(double v, const ChannelConfig& cfg);

// Inverse remap of a duty count to [-1, 1].
double duty_to_command(int duty, const ChannelConfig& cfg);

// Steering: radians in [-max_steer, max_steer]. Throttle: m/s, with the
// reverse half mapped to zero because the simulated rover has no reverse, and
// duties within one count of neutral also giving zero.
double duty_to_actuation(int duty, const ChannelConfig& cfg, const sim::VehicleParams& p);

// Both channels through the duty path into a simulator command.
sim::ActuatedCommand actuate(const ControlCommand& cmd, const ChannelConfig& steering,
                             const ChannelConfig& throttle, const sim::VehicleParams& p);

// Joystick potentiometer reading in [0, 1024] to [-1, 1] with a deadzone.
double joystick_remap(int raw, double deadzone = 0.0);

enum class Key { left, right, up, down, space, other };

// Keyboard soft pilot: left/right move steering by 0.1, up/down move
// throttle by 0.05, space centres both.
ControlCommand softpilot_step(Key key, const ControlCommand& current);

struct TransmitStats {
  std::uint64_t ticks = 0;
  std::uint64_t published = 0;  // individual topic messages
  std::uint64_t errors = 0;
};

struct TransmitOptions {
  double rate_hz = 20.0;
  // Sleep between ticks to hold the rate; off for virtual-time tests.
  bool realtime = true;
  std::optional<std::uint64_t> max_ticks;
};

// Publishes the latest command to both control topics every tick until
// stopped or max_ticks is reached. Publish failures are counted and retried
// on the next tick.
TransmitStats pilot_transmit_loop(const LatestValue<ControlCommand>& source,
                                  transport::MessagePublisher& bus, const TransmitOptions& options,
                                  std::stop_token stop = {});

// Rover-side actuation: subscribes to the two control topics, keeps the last
// value of each, and applies the link-loss failsafe (throttle forced to 0 when
// no control message arrived for `stale_after`).
class CommandReceiver {
 public:
  explicit CommandReceiver(std::chrono::milliseconds stale_after = std::chrono::milliseconds(500))
      : stale_after_(stale_after) {}

  // Feed one message; bad payloads are dropped and counted.
  void on_message(std::string_view topic, std::string_view payload,
                  std::chrono::steady_clock::time_point now = std::chrono::steady_clock::now());
  ControlCommand current(std::chrono::steady_clock::time_point now = std::chrono::steady_clock::now()) const;
  std::uint64_t dropped() const { return dropped_.load(); }
  std::uint64_t received() const { return received_.load(); }

 private:
  std::chrono::milliseconds stale_after_;
  mutable std::mutex mu_;
  ControlCommand last_;
  std::optional<std::chrono::steady_clock::time_point> last_seen_;
  std::atomic<std::uint64_t> dropped_{0};
  std::atomic<std::uint64_t> received_{0};
};

}  // namespace rolle::control
