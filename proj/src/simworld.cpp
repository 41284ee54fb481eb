#include "rolle/simworld.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rolle/errors.hpp"

namespace rolle::sim {
namespace {

constexpr double kCenterlineStep = 0.05;
constexpr double kBoundsMargin = 1.0;

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw InvalidSpecError("bad number '" + std::string(text) + "' for " + std::string(what));
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace

TrackSpec TrackSpec::parse(std::string_view text) {
  TrackSpec spec;
  const auto colon = text.find(':');
  const auto name = text.substr(0, colon);
  const auto args = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

  if (name == "points") {
    spec.kind = Kind::explicit_points;
    if (!args.empty()) {
      for (auto pair : split(args, ';')) {
        const auto xy = split(pair, ',');
        if (xy.size() != 2) throw InvalidSpecError("centerline point must be 'x,y': " + std::string(pair));
        spec.points.push_back({parse_double(xy[0], "x"), parse_double(xy[1], "y")});
      }
    }
    return spec;
  }
  if (name == "straight") {
    spec.kind = Kind::straight;
  } else if (name == "s-curve") {
    spec.kind = Kind::s_curve;
    spec.length = 60.0;
  } else if (name == "loop") {
    spec.kind = Kind::loop;
  } else {
    throw InvalidSpecError("unknown track '" + std::string(name) + "'");
  }
  if (args.empty()) return spec;
  for (auto kv : split(args, ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw InvalidSpecError("expected key=value in track spec: " + std::string(kv));
    const auto key = kv.substr(0, eq);
    const double value = parse_double(kv.substr(eq + 1), key);
    if (key == "length") spec.length = value;
    else if (key == "amplitude") spec.amplitude = value;
    else if (key == "wavelength") spec.wavelength = value;
    else if (key == "phase") spec.phase = value;
    else if (key == "radius") spec.radius = value;
    else if (key == "wobble") spec.wobble = value;
    else if (key == "lobes") {
      if (value != std::floor(value) || value < 0 || value > 1000)
        throw InvalidSpecError("lobes must be a whole number in [0, 1000]");
      spec.lobes = static_cast<int>(value);
    }
    else if (key == "half_width") spec.half_width = value;
    else throw InvalidSpecError("unknown track parameter '" + std::string(key) + "'");
  }
  return spec;
}

std::string TrackSpec::to_string() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind) {
    case Kind::straight:
      out << "straight:length=" << length << ",half_width=" << half_width;
      break;
    case Kind::s_curve:
      out << "s-curve:length=" << length << ",amplitude=" << amplitude << ",wavelength=" << wavelength
          << ",phase=" << phase << ",half_width=" << half_width;
      break;
    case Kind::loop:
      out << "loop:radius=" << radius << ",half_width=" << half_width;
      if (wobble != 0.0 || lobes != 0) out << ",wobble=" << wobble << ",lobes=" << lobes;
      break;
    case Kind::explicit_points:
      out << "points:";
      for (std::size_t i = 0; i < points.size(); ++i)
        out << (i ? ";" : "") << points[i].x << ',' << points[i].y;
      break;
  }
  return out.str();
}

World::World(std::vector<Vec2> centerline, double path_half_width, bool closed)
    : centerline_(std::move(centerline)), half_width_(path_half_width), closed_(closed) {
  if (centerline_.size() < 2) throw InvalidWorldError("centerline needs at least 2 points");
  if (!(path_half_width > 0.0) || !std::isfinite(path_half_width))
    throw InvalidWorldError("path half width must be positive");
  cumulative_.reserve(centerline_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 0; i + 1 < centerline_.size(); ++i) {
    const Vec2 a = centerline_[i];
    const Vec2 d = centerline_[i + 1] - a;
    const double len = std::hypot(d.x, d.y);
    if (!std::isfinite(len)) throw InvalidWorldError("non-finite centerline point");
    if (len > 0.0) segments_.push_back({a, (1.0 / len) * d, len, cumulative_.back()});
    cumulative_.push_back(cumulative_.back() + len);
  }
  if (segments_.empty()) throw InvalidWorldError("centerline has zero length");

  Vec2 lo = centerline_.front();
  Vec2 hi = centerline_.front();
  for (const auto& p : centerline_) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const double margin = half_width_ + kBoundsMargin;
  bounds_ = {{lo.x - margin, lo.y - margin}, {hi.x + margin, hi.y + margin}};
  build_grid();
}

void World::build_grid() {
  cell_size_ = std::max(0.25, 2.0 * half_width_);
  grid_w_ = static_cast<int>(std::ceil((bounds_.max.x - bounds_.min.x) / cell_size_)) + 1;
  grid_h_ = static_cast<int>(std::ceil((bounds_.max.y - bounds_.min.y) / cell_size_)) + 1;
  grid_.assign(static_cast<std::size_t>(grid_w_) * static_cast<std::size_t>(grid_h_), {});
  for (std::uint32_t i = 0; i < segments_.size(); ++i) {
    const auto& seg = segments_[i];
    const Vec2 b = seg.a + seg.length * seg.dir;
    const double x0 = std::min(seg.a.x, b.x) - half_width_ - bounds_.min.x;
    const double x1 = std::max(seg.a.x, b.x) + half_width_ - bounds_.min.x;
    const double y0 = std::min(seg.a.y, b.y) - half_width_ - bounds_.min.y;
    const double y1 = std::max(seg.a.y, b.y) + half_width_ - bounds_.min.y;
    const int cx0 = std::clamp(static_cast<int>(std::floor(x0 / cell_size_)), 0, grid_w_ - 1);
    const int cx1 = std::clamp(static_cast<int>(std::floor(x1 / cell_size_)), 0, grid_w_ - 1);
    const int cy0 = std::clamp(static_cast<int>(std::floor(y0 / cell_size_)), 0, grid_h_ - 1);
    const int cy1 = std::clamp(static_cast<int>(std::floor(y1 / cell_size_)), 0, grid_h_ - 1);
    for (int cy = cy0; cy <= cy1; ++cy)
      for (int cx = cx0; cx <= cx1; ++cx)
        grid_[static_cast<std::size_t>(cy) * static_cast<std::size_t>(grid_w_) +
              static_cast<std::size_t>(cx)]
            .push_back(i);
  }
}

Projection World::project(Vec2 p) const {
  Projection best;
  double best_d2 = std::numeric_limits<double>::infinity();
  double best_cross = 0.0;
  for (const auto& seg : segments_) {
    const Vec2 rel = p - seg.a;
    const double t = std::clamp(dot(rel, seg.dir), 0.0, seg.length);
    const Vec2 foot = seg.a + t * seg.dir;
    const Vec2 off = p - foot;
    const double d2 = dot(off, off);
    if (d2 < best_d2) {
      best_d2 = d2;
      best.arc_s = seg.s0 + t;
      best.tangent = seg.dir;
      best_cross = cross(seg.dir, rel);
    }
  }
  best.distance = std::sqrt(best_d2);
  best.signed_offset = best_cross < 0.0 ? -best.distance : best.distance;
  return best;
}

std::size_t World::segment_at(double s) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), s,
                             [](double v, const Segment& seg) { return v < seg.s0; });
  if (it == segments_.begin()) return 0;
  return static_cast<std::size_t>(std::distance(segments_.begin(), it)) - 1;
}

Vec2 World::point_at(double s) const {
  if (closed_) {
    s = std::fmod(s, total_length());
    if (s < 0.0) s += total_length();
  }
  const auto& seg = segments_[segment_at(s)];
  // Beyond either end of an open track this extrapolates the end segment.
  return seg.a + (s - seg.s0) * seg.dir;
}

Vec2 World::tangent_at(double s) const {
  if (closed_) {
    s = std::fmod(s, total_length());
    if (s < 0.0) s += total_length();
  }
  return segments_[segment_at(s)].dir;
}

Rgb8 World::ground_color(Vec2 p) const {
  if (!bounds_.contains(p)) return lawn_color;
  const int cx = std::min(static_cast<int>((p.x - bounds_.min.x) / cell_size_), grid_w_ - 1);
  const int cy = std::min(static_cast<int>((p.y - bounds_.min.y) / cell_size_), grid_h_ - 1);
  const auto& cell =
      grid_[static_cast<std::size_t>(cy) * static_cast<std::size_t>(grid_w_) + static_cast<std::size_t>(cx)];
  double best_d2 = half_width_ * half_width_;
  double best_s = -1.0;
  for (auto idx : cell) {
    const auto& seg = segments_[idx];
    const Vec2 rel = p - seg.a;
    const double t = std::clamp(dot(rel, seg.dir), 0.0, seg.length);
    const Vec2 off = rel - t * seg.dir;
    const double d2 = dot(off, off);
    if (d2 <= best_d2) {
      best_d2 = d2;
      best_s = seg.s0 + t;
    }
  }
  if (best_s < 0.0) return lawn_color;
  if (std::fmod(best_s, tile_length) < tile_seam_width) return tile_line_color;
  return path_color;
}

World build_track(const TrackSpec& spec) {
  if (!(spec.half_width > 0.0)) throw InvalidSpecError("half_width must be positive");
  std::vector<Vec2> pts;
  bool closed = false;
  switch (spec.kind) {
    case TrackSpec::Kind::straight:
      if (!(spec.length > 0.0)) throw InvalidSpecError("straight length must be positive");
      pts = {{0.0, 0.0}, {spec.length, 0.0}};
      break;
    case TrackSpec::Kind::s_curve: {
      if (!(spec.length > 0.0) || !(spec.wavelength > 0.0))
        throw InvalidSpecError("s-curve length and wavelength must be positive");
      const int n = static_cast<int>(std::ceil(spec.length / kCenterlineStep));
      const double k = 2.0 * std::numbers::pi / spec.wavelength;
      const double y0 = spec.amplitude * std::sin(spec.phase);
      for (int i = 0; i <= n; ++i) {
        const double x = spec.length * static_cast<double>(i) / n;
        pts.push_back({x, spec.amplitude * std::sin(k * x + spec.phase) - y0});
      }
      break;
    }
    case TrackSpec::Kind::loop: {
      if (!(spec.radius - std::abs(spec.wobble) > spec.half_width))
        throw InvalidSpecError("loop radius minus wobble must exceed half_width");
      // Starts at the origin and runs anticlockwise on screen, i.e. turns left
      // (toward -y). The radius ripples as R + wobble * sin(lobes * t).
      const double reach = spec.radius + std::abs(spec.wobble) * (1.0 + spec.lobes);
      const int n = std::max(16, static_cast<int>(std::ceil(2.0 * std::numbers::pi * reach / kCenterlineStep)));
      for (int i = 0; i < n; ++i) {
        const double t = 2.0 * std::numbers::pi * i / n;
        const double r = spec.radius + spec.wobble * std::sin(spec.lobes * t);
        pts.push_back({r * std::sin(t), -spec.radius + r * std::cos(t)});
      }
      pts.push_back(pts.front());
      closed = true;
      break;
    }
    case TrackSpec::Kind::explicit_points:
      pts = spec.points;
      if (pts.size() >= 2) closed = pts.front() == pts.back();
      break;
  }
  if (pts.size() < 2) throw InvalidSpecError("track centerline needs at least 2 points");
  try {
    return World(std::move(pts), spec.half_width, closed);
  } catch (const InvalidWorldError& e) {
    throw InvalidSpecError(e.what());
  }
}

void VehicleParams::validate() const {
  if (!(wheelbase > 0.0) || !(max_steer > 0.0) || !(max_speed > 0.0) || !(speed_time_constant > 0.0))
    throw InvalidSpecError("vehicle parameters must be strictly positive");
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

VehicleState step_vehicle(const VehicleState& s, const ActuatedCommand& cmd, double dt,
                          const VehicleParams& p) {
  const bool finite = std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.heading) &&
                      std::isfinite(s.speed) && std::isfinite(cmd.steering_angle) &&
                      std::isfinite(cmd.speed) && std::isfinite(dt);
  if (!finite) throw NumericInputError("step_vehicle received a non-finite input");
  if (!(dt > 0.0)) throw NumericInputError("step_vehicle needs dt > 0");

  VehicleState next = s;
  next.steering_angle = std::clamp(cmd.steering_angle, -p.max_steer, p.max_steer);
  const double target = std::clamp(cmd.speed, 0.0, p.max_speed);
  next.speed = std::clamp(s.speed + (target - s.speed) * dt / p.speed_time_constant, 0.0, p.max_speed);
  next.x = s.x + next.speed * std::cos(s.heading) * dt;
  next.y = s.y + next.speed * std::sin(s.heading) * dt;
  next.heading = wrap_angle(s.heading + next.speed / p.wheelbase * std::tan(next.steering_angle) * dt);
  return next;
}

VehicleState start_pose(const World& w) {
  const Vec2 p = w.centerline().front();
  const Vec2 t = w.tangent_at(0.0);
  return {p.x, p.y, std::atan2(t.y, t.x), 0.0, 0.0};
}

ImageFrame render_camera(const World& w, const VehicleState& s, int raw_w, int raw_h,
                         const CameraModel& cam) {
  if (raw_w < 16 || raw_h < 16) throw ImageError("camera frame must be at least 16x16");
  ImageFrame frame(raw_w, raw_h);
  const double focal = 0.5 * raw_w / std::tan(0.5 * cam.horizontal_fov);
  const double cp = std::cos(cam.pitch);
  const double sp = std::sin(cam.pitch);
  const Vec2 fwd{std::cos(s.heading), std::sin(s.heading)};
  const Vec2 right{-fwd.y, fwd.x};
  const Vec2 origin{s.x, s.y};

  for (int r = 0; r < raw_h; ++r) {
    const double down = (r + 0.5 - 0.5 * raw_h) / focal;
    const double ray_down = down * cp + sp;
    const double ray_fwd = cp - down * sp;
    const int out_row = raw_h - 1 - r;
    if (ray_down <= 1e-9) {
      for (int c = 0; c < raw_w; ++c) frame.set(out_row, raw_w - 1 - c, w.lawn_color);
      continue;
    }
    const double t = cam.height / ray_down;
    const Vec2 row_origin = origin + (t * ray_fwd) * fwd;
    for (int c = 0; c < raw_w; ++c) {
      const double lateral = t * (c + 0.5 - 0.5 * raw_w) / focal;
      frame.set(out_row, raw_w - 1 - c, w.ground_color(row_origin + lateral * right));
    }
  }
  return frame;
}

bool off_path(const World& w, const VehicleState& s) {
  return w.project({s.x, s.y}).distance > w.path_half_width();
}

double oracle_steer(const World& w, const VehicleState& s, double lookahead, const VehicleParams& p,
                    double left_offset) {
  if (w.centerline().empty()) throw InvalidWorldError("empty centerline");
  if (!(lookahead > 0.0)) throw InvalidSpecError("lookahead must be positive");
  if (!std::isfinite(left_offset)) throw InvalidSpecError("left_offset must be finite");
  const auto proj = w.project({s.x, s.y});
  Vec2 target = w.point_at(proj.arc_s + lookahead);
  const Vec2 t = w.tangent_at(proj.arc_s + lookahead);
  target.x += t.y * left_offset;  // left normal is (ty, -tx) with y to the right
  target.y -= t.x * left_offset;
  const double alpha = wrap_angle(std::atan2(target.y - s.y, target.x - s.x) - s.heading);
  const double curvature = 2.0 * std::sin(alpha) / lookahead;
  const double delta = std::atan(curvature * p.wheelbase);
  return std::clamp(delta / p.max_steer, -1.0, 1.0);
}

}  // namespace rolle::sim
