#include "rolle/control.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <thread>

#include "rolle/errors.hpp"
#include "rolle/transport/control_payload.hpp"

namespace rolle::control {
namespace {

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

// Keeps repeated key steps on the 4-decimal wire grid.
double snap(double v) { return std::round(v * 10000.0) / 10000.0; }

}  // namespace

ControlCommand ControlCommand::clamped() const {
  return {std::isfinite(steering) ? clamp_unit(steering) : 0.0,
          std::isfinite(throttle) ? clamp_unit(throttle) : 0.0};
}

void ChannelConfig::validate() const {
  if (min_duty < 0 || max_duty > 4095 || min_duty >= max_duty)
    throw ConfigError("duty range must satisfy 0 <= min < max <= 4095, got " +
                      std::to_string(min_duty) + ".." + std::to_string(max_duty));
}

int command_to_duty(double v, const ChannelConfig& cfg) {
  if (!std::isfinite(v)) throw NumericInputError("command_to_duty: non-finite value");
  v = clamp_unit(v);
  const double exact = cfg.min_duty + (v + 1.0) / 2.0 * (cfg.max_duty - cfg.min_duty);
  return static_cast<int>(std::floor(exact + 0.5));
}

double duty_to_command(int duty, const ChannelConfig& cfg) {
  if (duty < cfg.min_duty || duty > cfg.max_duty) {
    spdlog::warn("duty {} outside channel range {}..{}, clamping", duty, cfg.min_duty, cfg.max_duty);
    duty = std::clamp(duty, cfg.min_duty, cfg.max_duty);
  }
  return 2.0 * (duty - cfg.min_duty) / static_cast<double>(cfg.max_duty - cfg.min_duty) - 1.0;
}

double duty_to_actuation(int duty, const ChannelConfig& cfg, const sim::VehicleParams& p) {
  const double v = duty_to_command(duty, cfg);
  if (cfg.channel == Channel::steering) return v * p.max_steer;
  // ESC neutral deadband: the count either side of neutral does not move the rover.
  const double neutral = 0.5 * (cfg.min_duty + cfg.max_duty);
  if (std::abs(duty - neutral) <= 1.0) return 0.0;
  return std::max(v, 0.0) * p.max_speed;
}

sim::ActuatedCommand actuate(const ControlCommand& cmd, const ChannelConfig& steering,
                             const ChannelConfig& throttle, const sim::VehicleParams& p) {
  const auto c = cmd.clamped();
  return {duty_to_actuation(command_to_duty(c.steering, steering), steering, p),
          duty_to_actuation(command_to_duty(c.throttle, throttle), throttle, p)};
}

double joystick_remap(int raw, double deadzone) {
  raw = std::clamp(raw, 0, 1024);
  const double v = (raw - 512) / 512.0;
  return std::abs(v) < deadzone ? 0.0 : v;
}

ControlCommand softpilot_step(Key key, const ControlCommand& current) {
  ControlCommand next = current;
  switch (key) {
    case Key::left: next.steering -= 0.1; break;
    case Key::right: next.steering += 0.1; break;
    case Key::up: next.throttle += 0.05; break;
    case Key::down: next.throttle -= 0.05; break;
    case Key::space: return {0.0, 0.0};
    case Key::other: return current;
  }
  return {snap(clamp_unit(next.steering)), snap(clamp_unit(next.throttle))};
}

TransmitStats pilot_transmit_loop(const LatestValue<ControlCommand>& source,
                                  transport::MessagePublisher& bus, const TransmitOptions& options,
                                  std::stop_token stop) {
  if (!(options.rate_hz > 0.0)) throw ConfigError("transmit rate must be positive");
  TransmitStats stats;
  const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / options.rate_hz));
  auto next_tick = std::chrono::steady_clock::now();

  while (!stop.stop_requested()) {
    if (options.max_ticks && stats.ticks >= *options.max_ticks) break;
    const auto cmd = source.load().clamped();
    try {
      bus.publish(transport::kSteeringTopic, transport::encode_control(cmd.steering));
      ++stats.published;
      bus.publish(transport::kThrottleTopic, transport::encode_control(cmd.throttle));
      ++stats.published;
    } catch (const Error& e) {
      ++stats.errors;
      spdlog::debug("pilot transmit: {}", e.what());
    }
    ++stats.ticks;
    if (options.realtime) {
      next_tick += period;
      std::this_thread::sleep_until(next_tick);
    }
  }
  return stats;
}

void CommandReceiver::on_message(std::string_view topic, std::string_view payload,
                                 std::chrono::steady_clock::time_point now) {
  double value = 0.0;
  try {
    value = transport::decode_control(payload);
  } catch (const PayloadError& e) {
    ++dropped_;
    spdlog::warn("dropping control message on {}: {}", topic, e.what());
    return;
  }
  std::lock_guard lock(mu_);
  if (topic == transport::kSteeringTopic) {
    last_.steering = value;
  } else if (topic == transport::kThrottleTopic) {
    last_.throttle = value;
  } else {
    ++dropped_;
    return;
  }
  last_seen_ = now;
  ++received_;
}

ControlCommand CommandReceiver::current(std::chrono::steady_clock::time_point now) const {
  std::lock_guard lock(mu_);
  ControlCommand cmd = last_;
  if (!last_seen_ || now - *last_seen_ > stale_after_) cmd.throttle = 0.0;
  return cmd;
}

}  // namespace rolle::control
