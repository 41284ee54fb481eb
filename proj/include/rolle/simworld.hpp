#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rolle/image.hpp"

// Deterministic stand-in for the rover's physical environment: a tiled path
// bordered by lawn, a kinematic bicycle vehicle, and an upside-down camera.
//
// Frame convention: x forward along the world, y to the right, heading
// measured from +x toward +y. A positive steering angle therefore turns the
// rover right and a negative one left, matching the control convention where
// -1 is full left.
namespace rolle::sim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct Bounds {
  Vec2 min;
  Vec2 max;
  bool contains(Vec2 p) const { return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y; }
};

// Nearest point on the centerline relative to a query point.
struct Projection {
  double distance = 0.0;
  double arc_s = 0.0;           // arc length of the foot point from the first point
  double signed_offset = 0.0;   // > 0 when the query lies right of the travel direction
  Vec2 tangent{1.0, 0.0};
};

struct TrackSpec {
  enum class Kind { straight, s_curve, loop, explicit_points };
  Kind kind = Kind::straight;
  double length = 30.0;       // straight: length; s-curve: extent along x
  double amplitude = 1.0;     // s-curve
  double wavelength = 6.0;    // s-curve
  double phase = 0.0;         // s-curve, radians
  double radius = 3.0;        // loop
  double wobble = 0.0;        // loop: radial ripple amplitude
  int lobes = 0;              // loop: ripples per lap
  double half_width = 0.15;
  std::vector<Vec2> points;   // explicit centerline

  // "straight", "s-curve:amplitude=0.8,wavelength=7", "loop:radius=1.2",
  // "loop:radius=1.6,wobble=0.3,lobes=5",
  // "points:0,0;5,0;10,2". Throws InvalidSpecError.
  static TrackSpec parse(std::string_view text);
  std::string to_string() const;
};

class World {
 public:
  World(std::vector<Vec2> centerline, double path_half_width, bool closed);

  const std::vector<Vec2>& centerline() const { return centerline_; }
  double path_half_width() const { return half_width_; }
  bool closed() const { return closed_; }
  double total_length() const { return cumulative_.back(); }
  const Bounds& bounds() const { return bounds_; }

  Rgb8 lawn_color{62, 128, 48};
  Rgb8 path_color{178, 168, 152};
  Rgb8 tile_line_color{92, 86, 80};
  double tile_length = 0.30;
  double tile_seam_width = 0.012;

  // Exact projection over every segment.
  Projection project(Vec2 p) const;
  // Point at arc length s; wraps on closed tracks and extrapolates the end
  // segments on open ones.
  Vec2 point_at(double s) const;
  Vec2 tangent_at(double s) const;
  // Ground colour at a world point. Uses the segment grid, so it only looks
  // at segments that can be within half a width of p.
  Rgb8 ground_color(Vec2 p) const;

 private:
  struct Segment {
    Vec2 a;
    Vec2 dir;  // unit
    double length;
    double s0;
  };
  std::size_t segment_at(double s) const;
  void build_grid();

  std::vector<Vec2> centerline_;
  std::vector<double> cumulative_;
  std::vector<Segment> segments_;
  double half_width_;
  bool closed_;
  Bounds bounds_;

  double cell_size_ = 0.0;
  int grid_w_ = 0;
  int grid_h_ = 0;
  std::vector<std::vector<std::uint32_t>> grid_;
};

World build_track(const TrackSpec& spec);

struct VehicleParams {
  double wheelbase = 0.18;
  double max_steer = 0.4363323129985824;  // 25 degrees
  double max_speed = 2.0;
  double speed_time_constant = 0.5;
  void validate() const;
};

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
  double steering_angle = 0.0;
  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct ActuatedCommand {
  double steering_angle = 0.0;  // radians
  double speed = 0.0;           // m/s
};

// Heading into (-pi, pi].
double wrap_angle(double a);

// One explicit Euler step of the kinematic bicycle model. Targets outside
// the vehicle limits are clamped. Throws NumericInputError on non-finite input.
VehicleState step_vehicle(const VehicleState& s, const ActuatedCommand& cmd, double dt,
                          const VehicleParams& p);

VehicleState start_pose(const World& w);

struct CameraModel {
  double height = 0.10;
  double pitch = 0.3490658503988659;            // 20 degrees down
  double horizontal_fov = 1.7453292519943295;   // 100 degrees
};

// Renders the forward ground plane as the physically inverted camera sees
// it (the returned frame is rotated by 180 degrees). raw_w, raw_h >= 16.
ImageFrame render_camera(const World& w, const VehicleState& s, int raw_w, int raw_h,
                         const CameraModel& cam = {});

bool off_path(const World& w, const VehicleState& s);

// Pure-pursuit steering in [-1, 1] toward the centerline point `lookahead`
// metres of arc ahead of the rover's projection, shifted `left_offset` metres
// to the left of the centerline.
double oracle_steer(const World& w, const VehicleState& s, double lookahead,
                    const VehicleParams& p = {}, double left_offset = 0.0);

}  // namespace rolle::sim
