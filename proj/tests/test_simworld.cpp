#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rolle/errors.hpp"
#include "rolle/simworld.hpp"

using namespace rolle;
using namespace rolle::sim;

namespace {

const double kMaxSteer = 25.0 * std::numbers::pi / 180.0;

}  // namespace

TEST(TrackSpec, ParsesBuiltInsAndParameters) {
  auto s = TrackSpec::parse("s-curve:amplitude=0.8,wavelength=7,phase=1.5,length=40");
  EXPECT_EQ(s.kind, TrackSpec::Kind::s_curve);
  EXPECT_DOUBLE_EQ(s.amplitude, 0.8);
  EXPECT_DOUBLE_EQ(s.wavelength, 7.0);
  EXPECT_DOUBLE_EQ(s.phase, 1.5);
  EXPECT_DOUBLE_EQ(s.length, 40.0);
  EXPECT_EQ(TrackSpec::parse("loop:radius=1.2").kind, TrackSpec::Kind::loop);
  EXPECT_EQ(TrackSpec::parse("points:0,0;5,0;10,2").points.size(), 3u);
  EXPECT_THROW(TrackSpec::parse("spiral"), InvalidSpecError);
  EXPECT_THROW(TrackSpec::parse("loop:radius=abc"), InvalidSpecError);
  EXPECT_THROW(TrackSpec::parse("s-curve:colour=3"), InvalidSpecError);
}

TEST(TrackSpec, ToStringRoundTrips) {
  for (const char* text :
       {"straight", "s-curve:amplitude=0.8,wavelength=7", "loop:radius=1.5", "loop:radius=1.5,wobble=0.3,lobes=4"}) {
    const auto a = TrackSpec::parse(text);
    const auto b = TrackSpec::parse(a.to_string());
    EXPECT_EQ(a.kind, b.kind);
    EXPECT_DOUBLE_EQ(a.amplitude, b.amplitude);
    EXPECT_DOUBLE_EQ(a.radius, b.radius);
    EXPECT_DOUBLE_EQ(a.length, b.length);
    EXPECT_DOUBLE_EQ(a.wobble, b.wobble);
    EXPECT_EQ(a.lobes, b.lobes);
  }
  EXPECT_THROW(TrackSpec::parse("loop:lobes=2.5"), InvalidSpecError);
}

TEST(BuildTrack, StraightThirtyMetres) {
  TrackSpec spec;
  spec.kind = TrackSpec::Kind::straight;
  spec.length = 30.0;
  const World w = build_track(spec);
  EXPECT_EQ(w.centerline().size(), 2u);
  EXPECT_NEAR(w.total_length(), 30.0, 1e-12);
  EXPECT_TRUE(w.bounds().contains({0.0, 0.0}));
  EXPECT_TRUE(w.bounds().contains({30.0, 0.0}));
}

TEST(BuildTrack, LoopIsClosed) {
  const World w = build_track(TrackSpec::parse("loop:radius=2"));
  EXPECT_TRUE(w.closed());
  const auto& c = w.centerline();
  EXPECT_NEAR(c.front().x, c.back().x, 1e-9);
  EXPECT_NEAR(c.front().y, c.back().y, 1e-9);
  EXPECT_NEAR(w.total_length(), 2.0 * std::numbers::pi * 2.0, 0.01);
}

TEST(BuildTrack, WobblyLoopTurnsBothWaysAndNetsOneLeftLap) {
  const World w = build_track(TrackSpec::parse("loop:radius=1.5,wobble=0.3,lobes=4"));
  EXPECT_TRUE(w.closed());
  const auto& c = w.centerline();
  EXPECT_NEAR(c.front().x, 0.0, 1e-12);
  EXPECT_NEAR(c.front().y, 0.0, 1e-12);
  double total = 0.0;
  int left = 0, right = 0;
  for (std::size_t i = 1; i + 1 < c.size(); ++i) {
    const double a = std::atan2(c[i].y - c[i - 1].y, c[i].x - c[i - 1].x);
    const double b = std::atan2(c[i + 1].y - c[i].y, c[i + 1].x - c[i].x);
    const double turn = wrap_angle(b - a);
    total += turn;
    left += turn < 0;
    right += turn > 0;
  }
  EXPECT_NEAR(total, -2.0 * std::numbers::pi, 0.05);
  EXPECT_GT(left, 0);
  EXPECT_GT(right, 0);
  EXPECT_THROW(build_track(TrackSpec::parse("loop:radius=1,wobble=0.9,lobes=3")), InvalidSpecError);
}

TEST(BuildTrack, OnePointCenterlineIsInvalid) {
  TrackSpec spec;
  spec.kind = TrackSpec::Kind::explicit_points;
  spec.points = {{0.0, 0.0}};
  EXPECT_THROW(build_track(spec), InvalidSpecError);
  EXPECT_THROW(World({{1.0, 1.0}}, 0.15, false), InvalidWorldError);
}

TEST(BuildTrack, Deterministic) {
  const auto a = build_track(TrackSpec::parse("s-curve"));
  const auto b = build_track(TrackSpec::parse("s-curve"));
  EXPECT_EQ(a.centerline(), b.centerline());
}

TEST(StepVehicle, StraightLineMotion) {
  VehicleParams p;
  const VehicleState s{0, 0, 0, 1.0, 0};
  const auto n = step_vehicle(s, {0.0, 1.0}, 1.0, p);
  EXPECT_NEAR(n.x, 1.0, 1e-12);
  EXPECT_NEAR(n.y, 0.0, 1e-12);
  EXPECT_NEAR(n.heading, 0.0, 1e-12);
  EXPECT_NEAR(n.speed, 1.0, 1e-12);
}

TEST(StepVehicle, ZeroSpeedKeepsPose) {
  VehicleParams p;
  for (double d : {-kMaxSteer, 0.0, 0.2, kMaxSteer}) {
    const VehicleState s{1.5, -2.0, 0.7, 0.0, 0.0};
    const auto n = step_vehicle(s, {d, 0.0}, 1.0 / 32, p);
    EXPECT_EQ(n.x, s.x);
    EXPECT_EQ(n.y, s.y);
    EXPECT_EQ(n.heading, s.heading);
  }
}

TEST(StepVehicle, HeadingRateAtFullLock) {
  // Oracle: theta' = v * tan(delta) / L evaluated by hand for v = 1.
  const double rate = std::tan(0.4363323129985824) / 0.18;
  EXPECT_NEAR(rate, 2.5906, 5e-5);
  VehicleParams p;
  const auto n = step_vehicle({0, 0, 0, 1.0, 0}, {kMaxSteer, 1.0}, 0.01, p);
  EXPECT_NEAR(n.heading, 0.025906, 1e-6);
  EXPECT_NEAR(n.heading, rate * 0.01, 1e-6);
  EXPECT_DOUBLE_EQ(n.steering_angle, kMaxSteer);
}

TEST(StepVehicle, ClampsTargetsAndRejectsNonFinite) {
  VehicleParams p;
  const auto n = step_vehicle({0, 0, 0, 0, 0}, {10.0, 99.0}, 0.1, p);
  EXPECT_DOUBLE_EQ(n.steering_angle, p.max_steer);
  EXPECT_LE(n.speed, p.max_speed);
  EXPECT_THROW(step_vehicle({0, 0, 0, 0, 0}, {NAN, 0.0}, 0.1, p), NumericInputError);
  EXPECT_THROW(step_vehicle({0, 0, 0, 0, 0}, {0.0, 1.0}, INFINITY, p), NumericInputError);
}

TEST(StepVehicleProperty, HeadingWrapsAndSpeedStaysInRange) {
  VehicleParams p;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> steer(-1.5, 1.5), speed(-3.0, 5.0);
  VehicleState s{0, 0, 3.1, 0, 0};
  for (int i = 0; i < 20000; ++i) {
    s = step_vehicle(s, {steer(rng), speed(rng)}, 1.0 / 32, p);
    ASSERT_GT(s.heading, -std::numbers::pi);
    ASSERT_LE(s.heading, std::numbers::pi);
    ASSERT_GE(s.speed, 0.0);
    ASSERT_LE(s.speed, p.max_speed);
    ASSERT_LE(std::abs(s.steering_angle), p.max_steer);
  }
}

TEST(StepVehicleProperty, ZeroSteeringIsStraight) {
  VehicleParams p;
  for (double heading : {0.0, 0.3, -2.0, 3.0}) {
    VehicleState s{1.0, 2.0, heading, 0.0, 0.0};
    for (int i = 0; i < 500; ++i) s = step_vehicle(s, {0.0, 1.2}, 1.0 / 32, p);
    // Lateral deviation from the initial heading line.
    const double lateral = -(s.x - 1.0) * std::sin(heading) + (s.y - 2.0) * std::cos(heading);
    EXPECT_NEAR(lateral, 0.0, 1e-9);
  }
}

TEST(WrapAngle, Range) {
  EXPECT_DOUBLE_EQ(wrap_angle(std::numbers::pi), std::numbers::pi);
  EXPECT_DOUBLE_EQ(wrap_angle(-std::numbers::pi), std::numbers::pi);
  EXPECT_NEAR(wrap_angle(3 * std::numbers::pi / 2), -std::numbers::pi / 2, 1e-12);
}

TEST(RenderCamera, CentredOnStraightShowsPathAtBottomCentre) {
  const World w = build_track(TrackSpec::parse("straight"));
  const VehicleState s{2.0, 0.0, 0.0, 0.0, 0.0};
  const auto raw = render_camera(w, s, 320, 240);
  // Un-rotate: the raw bottom-centre column sits at raw row 0.
  const int c = 320 / 2;
  for (int r = 0; r < 20; ++r) {
    const Rgb8 px = raw.at(r, 320 - 1 - c);
    EXPECT_TRUE(px == w.path_color || px == w.tile_line_color) << "row " << r;
  }
}

TEST(RenderCamera, FarOnLawnIsAllLawn) {
  const World w = build_track(TrackSpec::parse("straight"));
  const VehicleState s{15.0, 500.0, 0.3, 0.0, 0.0};
  const auto raw = render_camera(w, s, 64, 48);
  for (int r = 0; r < raw.height; ++r)
    for (int c = 0; c < raw.width; ++c) ASSERT_EQ(raw.at(r, c), w.lawn_color);
}

TEST(RenderCamera, DeterministicAndSized) {
  const World w = build_track(TrackSpec::parse("s-curve"));
  const VehicleState s{3.0, 0.2, 0.4, 0.5, 0.1};
  const auto a = render_camera(w, s, 320, 240);
  const auto b = render_camera(w, s, 320, 240);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.width, 320);
  EXPECT_EQ(a.height, 240);
  EXPECT_THROW(render_camera(w, s, 8, 240), ImageError);
}

TEST(RenderCamera, ShowsTileSeams) {
  const World w = build_track(TrackSpec::parse("straight"));
  const auto raw = render_camera(w, {2.0, 0.0, 0.0, 0.0, 0.0}, 320, 240);
  int seams = 0;
  for (std::size_t i = 0; i < raw.pixels.size(); i += 3)
    if (raw.pixels[i] == w.tile_line_color.r && raw.pixels[i + 1] == w.tile_line_color.g) ++seams;
  EXPECT_GT(seams, 0);
}

TEST(OffPath, BoundaryInclusive) {
  const World w({{0.0, 0.0}, {10.0, 0.0}}, 0.15, false);
  EXPECT_FALSE(off_path(w, {5.0, 0.0, 0, 0, 0}));
  EXPECT_FALSE(off_path(w, {5.0, 0.15, 0, 0, 0}));
  EXPECT_FALSE(off_path(w, {5.0, -0.15, 0, 0, 0}));
  EXPECT_TRUE(off_path(w, {5.0, 0.30, 0, 0, 0}));
}

TEST(Project, SignedOffsetPositiveToTheRight) {
  const World w({{0.0, 0.0}, {10.0, 0.0}}, 0.15, false);
  // y grows to the right of a rover heading along +x.
  EXPECT_GT(w.project({5.0, 0.1}).signed_offset, 0.0);
  EXPECT_LT(w.project({5.0, -0.1}).signed_offset, 0.0);
  EXPECT_NEAR(w.project({5.0, -0.1}).arc_s, 5.0, 1e-12);
}

TEST(OracleSteer, ZeroOnCentrelineOfStraight) {
  const World w = build_track(TrackSpec::parse("straight"));
  EXPECT_NEAR(oracle_steer(w, {1.0, 0.0, 0.0, 0.0, 0.0}, 0.4), 0.0, 1e-12);
}

TEST(OracleSteer, TargetNinetyDegreesLeftClampsToMinusOne) {
  // Centerline heads to -y, which is the rover's left when facing +x.
  const World w({{0.0, 0.0}, {0.0, -10.0}}, 0.15, false);
  const double lookahead = 0.4;
  const double alpha = -std::numbers::pi / 2;
  const double expected = std::clamp(std::atan(2.0 * std::sin(alpha) / lookahead * 0.18) / kMaxSteer, -1.0, 1.0);
  EXPECT_DOUBLE_EQ(expected, -1.0);
  EXPECT_DOUBLE_EQ(oracle_steer(w, {0.0, 0.0, 0.0, 0.0, 0.0}, lookahead), -1.0);
}

TEST(OracleSteer, RangeAndPreconditions) {
  const World w = build_track(TrackSpec::parse("s-curve"));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> x(-5, 70), y(-4, 4), h(-3.14, 3.14);
  for (int i = 0; i < 2000; ++i) {
    const double v = oracle_steer(w, {x(rng), y(rng), h(rng), 0, 0}, 0.4);
    ASSERT_GE(v, -1.0);
    ASSERT_LE(v, 1.0);
  }
  EXPECT_THROW(oracle_steer(w, {}, 0.0), InvalidSpecError);
}

TEST(OracleSteer, LeftOffsetShiftsTheTargetLine) {
  const World w = build_track(TrackSpec::parse("straight"));
  // Centred and aligned: a left-shifted line pulls left.
  EXPECT_LT(oracle_steer(w, {1.0, 0.0, 0.0, 0.5, 0.0}, 0.4, {}, 0.1), 0.0);
  // Already on the shifted line (y = -0.1 is left): no correction.
  EXPECT_NEAR(oracle_steer(w, {1.0, -0.1, 0.0, 0.5, 0.0}, 0.4, {}, 0.1), 0.0, 1e-12);
  EXPECT_THROW(oracle_steer(w, {}, 0.4, {}, std::nan("")), InvalidSpecError);
}

TEST(OracleSteerProperty, ReducesOffsetOnStraight) {
  const World w = build_track(TrackSpec::parse("straight"));
  VehicleParams p;
  for (double y0 : {0.12, -0.12, 0.3}) {
    VehicleState s{0.5, y0, 0.0, 0.5, 0.0};
    // Discrete pure pursuit may overshoot slightly but never grows the error.
    const double start = std::abs(s.y);
    for (int i = 0; i < 200; ++i) {
      const double v = oracle_steer(w, s, 0.4, p);
      s = step_vehicle(s, {v * p.max_steer, 0.5}, 1.0 / 32, p);
      ASSERT_LE(std::abs(s.y), start + 1e-12) << "step " << i;
      if (i >= 100) ASSERT_LT(std::abs(s.y), 0.05 * start) << "step " << i;
    }
    EXPECT_LT(std::abs(s.y), 0.01);
  }
}
