#include "rolle/sim_drive.hpp"

#include <cmath>
#include <thread>

#include "rolle/errors.hpp"

namespace rolle::sim_drive {

namespace {

// Box-Muller on 53-bit uniforms so the stream does not depend on the
// standard library's distribution implementation.
double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - learning::unit_uniform(rng);  // (0, 1]
  const double u2 = learning::unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

void RoverConfig::validate() const {
  vehicle.validate();
  steering_channel.validate();
  throttle_channel.validate();
  if (raw_width < 16 || raw_height < 16) throw ConfigError("camera raw size must be at least 16x16");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw ConfigError("fps must be positive");
}

SteeringDisturbance::SteeringDisturbance(const DisturbanceParams& p) : p_(p), rng_(p.seed) {
  if (!(p.sigma >= 0.0) || !(p.time_constant > 0.0))
    throw ConfigError("disturbance needs sigma >= 0 and a positive time constant");
}

double SteeringDisturbance::step(double dt) {
  if (p_.sigma == 0.0) return 0.0;
  // Exact discretization of the OU process.
  const double a = std::exp(-dt / p_.time_constant);
  x_ = a * x_ + p_.sigma * std::sqrt(1.0 - a * a) * standard_normal(rng_);
  return x_;
}

SimRover::SimRover(sim::World world, const RoverConfig& cfg, const DisturbanceParams& disturbance)
    : world_(std::move(world)), cfg_(cfg), disturbance_(disturbance) {
  cfg_.validate();
  state_ = sim::start_pose(world_);
}

std::uint64_t SimRover::timestamp_ms() const {
  return static_cast<std::uint64_t>(std::floor(static_cast<double>(tick_) * 1000.0 / cfg_.fps));
}

ImageFrame SimRover::capture() const {
  auto f = sim::render_camera(world_, state_, cfg_.raw_width, cfg_.raw_height, cfg_.camera);
  f.timestamp_ms = timestamp_ms();
  return f;
}

void SimRover::step(const control::ControlCommand& cmd) {
  const double dt = 1.0 / cfg_.fps;
  auto act = control::actuate(cmd, cfg_.steering_channel, cfg_.throttle_channel, cfg_.vehicle);
  act.steering_angle += disturbance_.step(dt);
  const auto before = state_;
  state_ = sim::step_vehicle(state_, act, dt, cfg_.vehicle);
  distance_ += std::hypot(state_.x - before.x, state_.y - before.y);
  ++tick_;
}

SimFrameSource::SimFrameSource(SimRover& rover, std::size_t frames,
                               std::function<control::ControlCommand()> command,
                               std::function<void(const SimRover&)> before_capture, bool realtime)
    : rover_(rover), frames_(frames), command_(std::move(command)), before_capture_(std::move(before_capture)),
      realtime_(realtime), start_(std::chrono::steady_clock::now()) {}

std::optional<ImageFrame> SimFrameSource::next() {
  if (produced_ >= frames_) return std::nullopt;
  if (produced_ > 0) rover_.step(command_());
  if (realtime_) {
    const auto due = start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                  std::chrono::duration<double>(static_cast<double>(produced_) / rover_.config().fps));
    std::this_thread::sleep_until(due);
  }
  if (before_capture_) before_capture_(rover_);
  ++produced_;
  return rover_.capture();
}

std::size_t frame_count(double duration_s, double fps) {
  if (!(duration_s >= 0.0) || !(fps > 0.0)) throw ConfigError("duration and fps must be positive");
  return static_cast<std::size_t>(std::llround(duration_s * fps));
}

control::ControlCommand OracleDriver::command(const sim::World& w, const sim::VehicleState& s) {
  return control::ControlCommand{sim::oracle_steer(w, s, lookahead_, params_), throttle_}.clamped();
}

control::ControlCommand LeftBiasedDriver::command(const sim::World& w, const sim::VehicleState& s) {
  const double want = sim::oracle_steer(w, s, lookahead_, params_, lane_offset_);
  const double steer = want < -threshold_ ? -1.0 : (want > threshold_ ? want : 0.0);
  return control::ControlCommand{steer, throttle_}.clamped();
}

}  // namespace rolle::sim_drive
