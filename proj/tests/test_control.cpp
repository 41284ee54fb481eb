#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "rolle/control.hpp"
#include "rolle/errors.hpp"
#include "rolle/transport/broker.hpp"
#include "rolle/transport/control_payload.hpp"

using namespace rolle;
using namespace rolle::control;

namespace {

struct RecordingBus final : transport::MessagePublisher {
  std::vector<std::pair<std::string, std::string>> messages;
  void publish(std::string_view topic, std::string_view payload) override {
    messages.emplace_back(std::string(topic), std::string(payload));
  }
};

struct FailingBus final : transport::MessagePublisher {
  void publish(std::string_view, std::string_view) override { throw SocketError("link down"); }
};

}  // namespace

TEST(CommandToDuty, Endpoints) {
  const auto cfg = default_steering_channel();
  EXPECT_EQ(command_to_duty(-1.0, cfg), 205);
  EXPECT_EQ(command_to_duty(1.0, cfg), 410);
  EXPECT_EQ(command_to_duty(0.0, cfg), 308);  // 307.5 rounds half up
  EXPECT_EQ(command_to_duty(-7.0, cfg), 205);
  EXPECT_EQ(command_to_duty(7.0, cfg), 410);
  EXPECT_THROW(command_to_duty(NAN, cfg), NumericInputError);
}

TEST(CommandToDuty, MonotoneAndQuantizationBound) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> lo(0, 3000), span(1, 1000);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    ChannelConfig cfg;
    cfg.min_duty = lo(rng);
    cfg.max_duty = std::min(4095, cfg.min_duty + span(rng));
    cfg.validate();
    EXPECT_EQ(command_to_duty(-1.0, cfg), cfg.min_duty);
    EXPECT_EQ(command_to_duty(1.0, cfg), cfg.max_duty);
    int prev = cfg.min_duty;
    for (int i = 0; i <= 100; ++i) {
      const double v = -1.0 + 0.02 * i;
      const int d = command_to_duty(v, cfg);
      ASSERT_GE(d, prev);
      prev = d;
    }
    for (int i = 0; i < 50; ++i) {
      const double v = val(rng);
      const double back = duty_to_command(command_to_duty(v, cfg), cfg);
      ASSERT_LE(std::abs(v - back), 1.0 / (cfg.max_duty - cfg.min_duty) + 1e-12);
    }
  }
}

TEST(CommandToDuty, SignInvariantAcrossConfigs) {
  sim::VehicleParams p;
  for (auto [lo, hi] : {std::pair{0, 4095}, std::pair{205, 410}, std::pair{1000, 1003}}) {
    ChannelConfig cfg{lo, hi, Channel::steering};
    for (double v : {-1.0, -0.6, -0.2, 0.2, 0.6, 1.0}) {
      const double a = duty_to_actuation(command_to_duty(v, cfg), cfg, p);
      EXPECT_EQ(std::signbit(a), std::signbit(v)) << lo << ".." << hi << " v=" << v;
    }
  }
}

TEST(ChannelConfig, Validation) {
  EXPECT_NO_THROW(default_throttle_channel().validate());
  EXPECT_THROW((ChannelConfig{410, 205, Channel::steering}.validate()), ConfigError);
  EXPECT_THROW((ChannelConfig{-1, 205, Channel::steering}.validate()), ConfigError);
  EXPECT_THROW((ChannelConfig{0, 4096, Channel::steering}.validate()), ConfigError);
  EXPECT_THROW((ChannelConfig{300, 300, Channel::steering}.validate()), ConfigError);
}

TEST(DutyToActuation, Examples) {
  sim::VehicleParams p;
  EXPECT_NEAR(duty_to_actuation(205, default_steering_channel(), p), -25.0 * std::numbers::pi / 180.0,
              1e-12);
  const double step = 2.0 / (410 - 205) * p.max_speed;
  EXPECT_LE(std::abs(duty_to_actuation(308, default_throttle_channel(), p)), step);
  EXPECT_EQ(duty_to_actuation(205, default_throttle_channel(), p), 0.0);
  EXPECT_EQ(duty_to_actuation(250, default_throttle_channel(), p), 0.0);
  // Out-of-range duty is clamped.
  EXPECT_DOUBLE_EQ(duty_to_actuation(999, default_throttle_channel(), p), p.max_speed);
}

TEST(Actuate, FullCommandPath) {
  sim::VehicleParams p;
  const auto a = actuate({1.0, 1.0}, default_steering_channel(), default_throttle_channel(), p);
  EXPECT_DOUBLE_EQ(a.steering_angle, p.max_steer);
  EXPECT_DOUBLE_EQ(a.speed, p.max_speed);
  const auto b = actuate({-0.5, -0.5}, default_steering_channel(), default_throttle_channel(), p);
  EXPECT_LT(b.steering_angle, 0.0);
  EXPECT_EQ(b.speed, 0.0);
}

TEST(JoystickRemap, Examples) {
  EXPECT_DOUBLE_EQ(joystick_remap(0), -1.0);
  EXPECT_DOUBLE_EQ(joystick_remap(512), 0.0);
  EXPECT_DOUBLE_EQ(joystick_remap(768), 0.5);
  EXPECT_DOUBLE_EQ(joystick_remap(1024), 1.0);
  EXPECT_DOUBLE_EQ(joystick_remap(-40), -1.0);
  EXPECT_DOUBLE_EQ(joystick_remap(5000), 1.0);
  EXPECT_DOUBLE_EQ(joystick_remap(530, 0.05), 0.0);
}

TEST(JoystickRemap, OddAboutCentre) {
  for (int k = 0; k <= 512; ++k) ASSERT_DOUBLE_EQ(joystick_remap(512 + k), -joystick_remap(512 - k));
}

TEST(SoftPilot, Examples) {
  EXPECT_EQ(softpilot_step(Key::left, {0.0, 0.0}), (ControlCommand{-0.1, 0.0}));
  EXPECT_EQ(softpilot_step(Key::left, {-1.0, 0.0}), (ControlCommand{-1.0, 0.0}));
  EXPECT_EQ(softpilot_step(Key::space, {0.3, 0.5}), (ControlCommand{0.0, 0.0}));
  EXPECT_EQ(softpilot_step(Key::up, {0.0, 0.0}), (ControlCommand{0.0, 0.05}));
  EXPECT_EQ(softpilot_step(Key::down, {0.0, -1.0}), (ControlCommand{0.0, -1.0}));
  EXPECT_EQ(softpilot_step(Key::other, {0.2, 0.3}), (ControlCommand{0.2, 0.3}));
}

TEST(SoftPilot, FiveLeftsFromRest) {
  ControlCommand c;
  for (int i = 0; i < 5; ++i) c = softpilot_step(Key::left, c);
  EXPECT_EQ(transport::encode_control(c.steering), "-0.5000");
  EXPECT_DOUBLE_EQ(c.steering, -0.5);
}

TEST(ControlCommand, Clamped) {
  EXPECT_EQ((ControlCommand{2.0, -3.0}.clamped()), (ControlCommand{1.0, -1.0}));
  EXPECT_EQ((ControlCommand{NAN, 0.5}.clamped()), (ControlCommand{0.0, 0.5}));
}

TEST(PilotTransmit, TwentyTicksPerTopic) {
  LatestValue<ControlCommand> cell({0.5, 0.2});
  RecordingBus bus;
  const auto stats = pilot_transmit_loop(cell, bus, {20.0, false, 20});
  EXPECT_EQ(stats.ticks, 20u);
  EXPECT_EQ(stats.published, 40u);
  EXPECT_EQ(stats.errors, 0u);
  int steering = 0, throttle = 0;
  for (const auto& [topic, payload] : bus.messages) {
    if (topic == transport::kSteeringTopic) {
      ++steering;
      EXPECT_EQ(payload, "0.5000");
    } else {
      ASSERT_EQ(topic, transport::kThrottleTopic);
      ++throttle;
      EXPECT_EQ(payload, "0.2000");
    }
  }
  EXPECT_EQ(steering, 20);
  EXPECT_EQ(throttle, 20);
}

TEST(PilotTransmit, RealtimeRateHoldsOneSecond) {
  LatestValue<ControlCommand> cell({-0.25, 0.0});
  RecordingBus bus;
  const auto t0 = std::chrono::steady_clock::now();
  const auto stats = pilot_transmit_loop(cell, bus, {20.0, true, 20});
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(stats.published, 40u);
  EXPECT_NEAR(elapsed, 1.0, 0.25);
}

TEST(PilotTransmit, RepublishesLastCommand) {
  LatestValue<ControlCommand> cell({0.1, 0.1});
  RecordingBus bus;
  pilot_transmit_loop(cell, bus, {20.0, false, 3});
  ASSERT_EQ(bus.messages.size(), 6u);
  EXPECT_EQ(bus.messages[0], bus.messages[4]);
}

TEST(PilotTransmit, FailuresCountedAndRetried) {
  LatestValue<ControlCommand> cell;
  FailingBus bus;
  const auto stats = pilot_transmit_loop(cell, bus, {20.0, false, 5});
  EXPECT_EQ(stats.published, 0u);
  EXPECT_EQ(stats.errors, 5u);
  EXPECT_EQ(stats.ticks, 5u);
}

TEST(PilotTransmit, DisconnectedClient) {
  auto broker = transport::Broker::serve({"127.0.0.1", 0});
  auto client = transport::MqttClient::connect({"127.0.0.1", broker->port()});
  client.disconnect();
  LatestValue<ControlCommand> cell({0.5, 0.5});
  const auto stats = pilot_transmit_loop(cell, client, {20.0, false, 4});
  EXPECT_EQ(stats.published, 0u);
  EXPECT_GT(stats.errors, 0u);
}

TEST(PilotTransmit, StopTokenEndsLoop) {
  LatestValue<ControlCommand> cell;
  RecordingBus bus;
  std::stop_source src;
  src.request_stop();
  const auto stats = pilot_transmit_loop(cell, bus, {20.0, true, std::nullopt}, src.get_token());
  EXPECT_EQ(stats.ticks, 0u);
}

TEST(CommandReceiver, KeepsLastValueAndAppliesFailsafe) {
  using namespace std::chrono_literals;
  CommandReceiver rx(500ms);
  const auto t0 = std::chrono::steady_clock::time_point{} + 10s;
  EXPECT_EQ(rx.current(t0), (ControlCommand{0.0, 0.0}));
  rx.on_message(transport::kSteeringTopic, "-0.5000", t0);
  rx.on_message(transport::kThrottleTopic, "0.3000", t0);
  EXPECT_EQ(rx.current(t0 + 100ms), (ControlCommand{-0.5, 0.3}));
  EXPECT_EQ(rx.current(t0 + 500ms), (ControlCommand{-0.5, 0.3}));
  EXPECT_EQ(rx.current(t0 + 501ms), (ControlCommand{-0.5, 0.0}));
  rx.on_message(transport::kSteeringTopic, "banana", t0);
  rx.on_message("other/topic", "0.1000", t0);
  EXPECT_EQ(rx.dropped(), 2u);
  EXPECT_EQ(rx.received(), 2u);
  rx.on_message(transport::kSteeringTopic, "2.0", t0 + 600ms);
  EXPECT_EQ(rx.current(t0 + 700ms), (ControlCommand{1.0, 0.3}));
}
