#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include "rolle/autopilot.hpp"
#include "rolle/errors.hpp"
#include "rolle/sim_drive.hpp"
#include "rolle/transport/frame_stream.hpp"
#include "test_util.hpp"

using namespace rolle;
using namespace rolle::autopilot;
using namespace std::chrono_literals;

namespace {

learning::Model<float> zero_model() { return learning::Model<float>(learning::ModelSpec::pilotnet()); }

// Random init with the output bias pushed far positive, so clamping matters.
learning::Model<float> saturated_model() {
  auto m = learning::init_model<float>(learning::ModelSpec::pilotnet(), 4);
  m.layers().back().bias[0] = 50.0f;
  return m;
}

struct Drive {
  std::vector<control::ControlCommand> applied;
  std::vector<sim::VehicleState> states;
  LoopStats stats;
};

Drive run(const learning::Model<float>& m, std::size_t frames, bool telemetry,
          const TelemetryQueue::Sink& sink = {}, std::size_t queue = 256) {
  sim_drive::SimRover rover(sim::build_track(sim::TrackSpec::parse("s-curve")), {});
  control::ControlCommand current;
  Drive d;
  sim_drive::SimFrameSource src(rover, frames, [&] { return current; },
                                [&](const sim_drive::SimRover& r) { d.states.push_back(r.state()); });
  AutopilotConfig cfg;
  cfg.telemetry = telemetry;
  cfg.telemetry_queue = queue;
  d.stats = autopilot_loop(src, m, cfg, [&](const control::ControlCommand& c) {
    current = c;
    d.applied.push_back(c);
  }, sink);
  return d;
}

}  // namespace

TEST(PredictSteering, ZeroModelAndClamp) {
  std::mt19937_64 rng(1);
  const auto zero = zero_model();
  const auto sat = saturated_model();
  for (int i = 0; i < 3; ++i) {
    const auto f = rolle::testing::random_frame(rng, 320, 240);
    EXPECT_EQ(predict_steering(zero, f), 0.0);
    EXPECT_EQ(predict_steering(sat, f), 1.0);
  }
  auto neg = saturated_model();
  neg.layers().back().bias[0] = -50.0f;
  EXPECT_EQ(predict_steering(neg, ImageFrame(320, 240)), -1.0);
}

TEST(PredictSteering, Pure) {
  const auto m = learning::init_model<float>(learning::ModelSpec::pilotnet(), 9);
  std::mt19937_64 rng(2);
  const auto f = rolle::testing::random_frame(rng, 320, 240);
  const double a = predict_steering(m, f);
  EXPECT_EQ(predict_steering(m, f), a);
  EXPECT_GE(a, -1.0);
  EXPECT_LE(a, 1.0);
}

TEST(AutopilotConfig, Validation) {
  AutopilotConfig c;
  EXPECT_NO_THROW(c.validate());
  c.constant_throttle = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c.constant_throttle = -0.1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.fps = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(AutopilotLoop, FiveSecondsOfTelemetry) {
  std::vector<transport::TelemetryFrame> seen;
  std::mutex mu;
  const auto d = run(learning::init_model<float>(learning::ModelSpec::pilotnet(), 3), 160, true,
                     [&](const transport::TelemetryFrame& f) {
                       std::lock_guard lock(mu);
                       seen.push_back(f);
                     });
  EXPECT_EQ(d.stats.ticks, 160u);
  EXPECT_EQ(d.stats.telemetry_sent + d.stats.telemetry_dropped, 160u);
  EXPECT_EQ(d.stats.telemetry_sent, 160u);
  ASSERT_EQ(seen.size(), 160u);
  for (std::size_t i = 0; i < seen.size(); ++i) {
    EXPECT_EQ(seen[i].timestamp_ms, i * 1000 / 32);
    EXPECT_EQ(seen[i].steering, static_cast<float>(d.applied[i].steering));
    EXPECT_EQ(seen[i].throttle, 0.25f);
    EXPECT_EQ(seen[i].width, 320u);
    EXPECT_EQ(seen[i].pixels.size(), 320u * 240u * 3u);
  }
}

TEST(AutopilotLoop, CommandsAndShutdown) {
  const auto d = run(learning::init_model<float>(learning::ModelSpec::pilotnet(), 3), 40, false);
  ASSERT_EQ(d.applied.size(), 41u);
  for (std::size_t i = 0; i + 1 < d.applied.size(); ++i) {
    EXPECT_EQ(d.applied[i].throttle, 0.25);
    EXPECT_GE(d.applied[i].steering, -1.0);
    EXPECT_LE(d.applied[i].steering, 1.0);
  }
  EXPECT_EQ(d.applied.back().throttle, 0.0);
  EXPECT_EQ(d.stats.telemetry_sent, 0u);
}

TEST(AutopilotLoop, TelemetryDoesNotChangeTrajectory) {
  const auto m = learning::init_model<float>(learning::ModelSpec::pilotnet(), 7);
  const auto off = run(m, 48, false);
  const auto on = run(m, 48, true, [](const transport::TelemetryFrame&) { std::this_thread::sleep_for(1ms); }, 2);
  EXPECT_EQ(off.states, on.states);
  EXPECT_EQ(on.stats.telemetry_sent + on.stats.telemetry_dropped, 48u);
}

TEST(AutopilotLoop, FailingViewerDisablesTelemetryOnly) {
  const auto d = run(zero_model(), 30, true, [](const transport::TelemetryFrame&) { throw SocketError("viewer gone"); });
  EXPECT_EQ(d.stats.ticks, 30u);
  EXPECT_TRUE(d.stats.telemetry_disabled);
  EXPECT_EQ(d.stats.telemetry_sent, 0u);
}

TEST(AutopilotLoop, StopExitsWithinOneTick) {
  sim_drive::SimRover rover(sim::build_track(sim::TrackSpec::parse("straight")), {});
  control::ControlCommand current;
  sim_drive::SimFrameSource src(rover, 1000, [&] { return current; });
  std::stop_source stop;
  std::vector<control::ControlCommand> applied;
  AutopilotConfig cfg;
  const auto stats = autopilot_loop(
      src, zero_model(), cfg,
      [&](const control::ControlCommand& c) {
        applied.push_back(c);
        if (applied.size() == 10) stop.request_stop();
      },
      {}, stop.get_token());
  EXPECT_EQ(stats.ticks, 10u);
  EXPECT_EQ(applied.size(), 11u);
  EXPECT_EQ(applied.back().throttle, 0.0);
}

TEST(AutopilotLoop, RealtimeOverSocket) {
  transport::TelemetryServer server({"127.0.0.1", 0});
  transport::Socket viewer = transport::connect_tcp({"127.0.0.1", server.port()});
  for (int i = 0; i < 200 && server.viewer_count() == 0; ++i) std::this_thread::sleep_for(5ms);
  ASSERT_EQ(server.viewer_count(), 1u);
  std::atomic<int> received{0};
  std::thread reader([&] {
    transport::SocketSource src(viewer);
    try {
      while (transport::frame_stream_read(src)) ++received;
    } catch (const Error&) {
    }
  });

  sim_drive::SimRover rover(sim::build_track(sim::TrackSpec::parse("straight")), {});
  control::ControlCommand current;
  sim_drive::SimFrameSource src(rover, 160, [&] { return current; });
  AutopilotConfig cfg;
  cfg.telemetry = true;
  cfg.realtime = true;
  cfg.telemetry_queue = 256;
  const auto t0 = std::chrono::steady_clock::now();
  const auto stats = autopilot_loop(src, zero_model(), cfg, [&](const control::ControlCommand& c) { current = c; },
                                    [&](const transport::TelemetryFrame& f) { server.broadcast(f); });
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(stats.ticks, 160u);
  EXPECT_NEAR(elapsed, 5.0, 0.5);
  server.stop();
  viewer.shutdown();
  reader.join();
  EXPECT_EQ(static_cast<std::uint64_t>(received.load()), stats.telemetry_sent);
  EXPECT_EQ(stats.telemetry_sent + stats.telemetry_dropped, 160u);
  EXPECT_EQ(received.load(), 160);
}

TEST(TelemetryQueue, DropsOldestUnderBackpressure) {
  std::atomic<bool> release{false};
  std::vector<std::uint64_t> written;
  std::mutex mu;
  {
    TelemetryQueue q(
        [&](const transport::TelemetryFrame& f) {
          while (!release) std::this_thread::sleep_for(1ms);
          std::lock_guard lock(mu);
          written.push_back(f.timestamp_ms);
        },
        4);
    for (std::uint64_t i = 0; i < 100; ++i) {
      transport::TelemetryFrame f;
      f.timestamp_ms = i;
      q.push(std::move(f));
    }
    release = true;
    q.close();
    EXPECT_EQ(q.sent() + q.dropped(), 100u);
    EXPECT_GT(q.dropped(), 0u);
    EXPECT_LE(q.sent(), 5u);
  }
  // The newest frame always survives.
  ASSERT_FALSE(written.empty());
  EXPECT_EQ(written.back(), 99u);
  EXPECT_TRUE(std::is_sorted(written.begin(), written.end()));
}

TEST(ClosedLoopEval, ZeroModelOnStraight) {
  const auto w = sim::build_track(sim::TrackSpec::parse("straight"));
  AutopilotConfig cfg;
  const auto m = closed_loop_eval(w, zero_model(), cfg, 5.0);
  EXPECT_EQ(m.ticks, 160u);
  EXPECT_EQ(m.off_path_fraction, 0.0);
  EXPECT_EQ(m.mean_abs_steering, 0.0);
  EXPECT_GT(m.distance_m, 1.0);
}

TEST(ClosedLoopEval, ZeroThrottleGoesNowhere) {
  const auto w = sim::build_track(sim::TrackSpec::parse("straight"));
  AutopilotConfig cfg;
  cfg.constant_throttle = 0.0;
  EXPECT_NEAR(closed_loop_eval(w, zero_model(), cfg, 2.0).distance_m, 0.0, 1e-9);
}

TEST(ClosedLoopEval, DeterministicWithNoise) {
  const auto w = sim::build_track(sim::TrackSpec::parse("s-curve"));
  const auto model = learning::init_model<float>(learning::ModelSpec::pilotnet(), 5);
  AutopilotConfig cfg;
  const sim_drive::DisturbanceParams noise{0.1, 1.0, 42};
  const auto a = closed_loop_eval(w, model, cfg, 2.0, {}, noise);
  const auto b = closed_loop_eval(w, model, cfg, 2.0, {}, noise);
  EXPECT_EQ(a.distance_m, b.distance_m);
  EXPECT_EQ(a.off_path_fraction, b.off_path_fraction);
  EXPECT_EQ(a.mean_left_offset_m, b.mean_left_offset_m);
  EXPECT_THROW(closed_loop_eval(w, model, cfg, 0.0), ConfigError);
}

TEST(SimDrive, FrameCountAndTimestamps) {
  EXPECT_EQ(sim_drive::frame_count(10.0, 32.0), 320u);
  EXPECT_EQ(sim_drive::frame_count(98.3, 32.0), 3146u);
  sim_drive::SimRover rover(sim::build_track(sim::TrackSpec::parse("straight")), {});
  for (int i = 0; i < 33; ++i) rover.step({0.0, 0.0});
  EXPECT_EQ(rover.timestamp_ms(), 1031u);
}

TEST(SimDrive, OracleDriverStaysOnSCurve) {
  const auto w = sim::build_track(sim::TrackSpec::parse("s-curve"));
  sim_drive::SimRover rover(w, {});
  sim_drive::OracleDriver driver;
  int off = 0;
  for (int i = 0; i < 32 * 30; ++i) {
    rover.step(driver.command(w, rover.state()));
    off += sim::off_path(w, rover.state());
  }
  EXPECT_EQ(off, 0);
  EXPECT_GT(rover.distance(), 10.0);
}

TEST(SimDrive, LeftBiasedDriverSteersFullLeftOnly) {
  const auto w = sim::build_track(sim::TrackSpec::parse("loop:radius=1.5,wobble=0.3,lobes=4"));
  sim_drive::SimRover rover(w, {});
  sim_drive::LeftBiasedDriver driver(0.4, 0.25, 0.3);
  int left = 0, right = 0;
  for (int i = 0; i < 640; ++i) {
    const auto c = driver.command(w, rover.state());
    ASSERT_TRUE(c.steering == -1.0 || c.steering == 0.0 || c.steering > 0.3) << c.steering;
    left += c.steering < 0;
    right += c.steering > 0;
    rover.step(c);
  }
  EXPECT_GT(left, 0);
  EXPECT_GT(right, 0);
}

TEST(SimDrive, LeftBiasedDriverKeepsLeftOfCentre) {
  const auto w = sim::build_track(sim::TrackSpec::parse("loop:radius=1.5,wobble=0.3,lobes=4"));
  sim_drive::SimRover rover(w, {});
  sim_drive::LeftBiasedDriver driver;
  double left = 0.0;
  int n = 0;
  for (int i = 0; i < 640; ++i) {
    rover.step(driver.command(w, rover.state()));
    ASSERT_FALSE(sim::off_path(w, rover.state())) << "step " << i;
    if (i >= 160) {
      left -= w.project({rover.state().x, rover.state().y}).signed_offset;
      ++n;
    }
  }
  EXPECT_GT(left / n, 0.04);
}

TEST(SimDrive, DisturbanceIsSeededAndStationary) {
  sim_drive::SteeringDisturbance a({0.1, 1.0, 3}), b({0.1, 1.0, 3});
  double sum2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = a.step(1.0 / 32);
    ASSERT_EQ(x, b.step(1.0 / 32));
    sum2 += x * x;
  }
  EXPECT_NEAR(std::sqrt(sum2 / n), 0.1, 0.01);
  sim_drive::SteeringDisturbance quiet({0.0, 1.0, 3});
  EXPECT_EQ(quiet.step(1.0 / 32), 0.0);
}
