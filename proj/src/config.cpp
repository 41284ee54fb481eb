#include "rolle/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "rolle/errors.hpp"

namespace rolle::config {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

int to_int32(const std::string& key, const std::string& v) {
  const long long x = to_int(key, v);
  if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(key + ": value out of range");
  return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

transport::Endpoint to_endpoint(const std::string& key, const std::string& v) {
  try {
    return transport::Endpoint::parse(v);
  } catch (const Error& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

constexpr double kDeg = std::numbers::pi / 180.0;

using Setter = std::function<void(StackConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const StackConfig&)>;

struct Key {
  const char* name;
  Setter set;
  Getter get;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      {"broker", [](auto& c, auto& n, auto& v) { c.broker = to_endpoint(n, v); },
       [](auto& c) { return c.broker.to_string(); }},
      {"telemetry", [](auto& c, auto& n, auto& v) { c.telemetry = to_endpoint(n, v); },
       [](auto& c) { return c.telemetry.to_string(); }},
      {"steering_min_duty", [](auto& c, auto& n, auto& v) { c.rover.steering_channel.min_duty = to_int32(n, v); },
       [](auto& c) { return std::to_string(c.rover.steering_channel.min_duty); }},
      {"steering_max_duty", [](auto& c, auto& n, auto& v) { c.rover.steering_channel.max_duty = to_int32(n, v); },
       [](auto& c) { return std::to_string(c.rover.steering_channel.max_duty); }},
      {"throttle_min_duty", [](auto& c, auto& n, auto& v) { c.rover.throttle_channel.min_duty = to_int32(n, v); },
       [](auto& c) { return std::to_string(c.rover.throttle_channel.min_duty); }},
      {"throttle_max_duty", [](auto& c, auto& n, auto& v) { c.rover.throttle_channel.max_duty = to_int32(n, v); },
       [](auto& c) { return std::to_string(c.rover.throttle_channel.max_duty); }},
      {"wheelbase", [](auto& c, auto& n, auto& v) { c.rover.vehicle.wheelbase = to_double(n, v); },
       [](auto& c) { return num(c.rover.vehicle.wheelbase); }},
      {"max_steer_deg", [](auto& c, auto& n, auto& v) { c.rover.vehicle.max_steer = to_double(n, v) * kDeg; },
       [](auto& c) { return num(c.rover.vehicle.max_steer / kDeg); }},
      {"max_speed", [](auto& c, auto& n, auto& v) { c.rover.vehicle.max_speed = to_double(n, v); },
       [](auto& c) { return num(c.rover.vehicle.max_speed); }},
      {"speed_time_constant",
       [](auto& c, auto& n, auto& v) { c.rover.vehicle.speed_time_constant = to_double(n, v); },
       [](auto& c) { return num(c.rover.vehicle.speed_time_constant); }},
      {"camera_width", [](auto& c, auto& n, auto& v) { c.rover.raw_width = to_int32(n, v); },
       [](auto& c) { return std::to_string(c.rover.raw_width); }},
      {"camera_height", [](auto& c, auto& n, auto& v) { c.rover.raw_height = to_int32(n, v); },
       [](auto& c) { return std::to_string(c.rover.raw_height); }},
      {"camera_height_m", [](auto& c, auto& n, auto& v) { c.rover.camera.height = to_double(n, v); },
       [](auto& c) { return num(c.rover.camera.height); }},
      {"camera_pitch_deg", [](auto& c, auto& n, auto& v) { c.rover.camera.pitch = to_double(n, v) * kDeg; },
       [](auto& c) { return num(c.rover.camera.pitch / kDeg); }},
      {"camera_hfov_deg",
       [](auto& c, auto& n, auto& v) { c.rover.camera.horizontal_fov = to_double(n, v) * kDeg; },
       [](auto& c) { return num(c.rover.camera.horizontal_fov / kDeg); }},
      {"crop_top", [](auto& c, auto& n, auto& v) { c.preprocess.crop_top = to_int32(n, v); },
       [](auto& c) { return std::to_string(c.preprocess.crop_top); }},
      {"fps", [](auto& c, auto& n, auto& v) { c.rover.fps = to_double(n, v); },
       [](auto& c) { return num(c.rover.fps); }},
      {"track", [](auto& c, auto&, auto& v) { c.track = v; }, [](auto& c) { return "\"" + c.track + "\""; }},
      {"epochs", [](auto& c, auto& n, auto& v) { c.hyper.epochs = to_int32(n, v); },
       [](auto& c) { return std::to_string(c.hyper.epochs); }},
      {"learning_rate", [](auto& c, auto& n, auto& v) { c.hyper.learning_rate = to_double(n, v); },
       [](auto& c) { return num(c.hyper.learning_rate); }},
      {"samples_per_epoch", [](auto& c, auto& n, auto& v) { c.hyper.samples_per_epoch = to_int32(n, v); },
       [](auto& c) { return std::to_string(c.hyper.samples_per_epoch); }},
      {"batch_size", [](auto& c, auto& n, auto& v) { c.hyper.batch_size = to_int32(n, v); },
       [](auto& c) { return std::to_string(c.hyper.batch_size); }},
      {"train_fraction", [](auto& c, auto& n, auto& v) { c.hyper.train_fraction = to_double(n, v); },
       [](auto& c) { return num(c.hyper.train_fraction); }},
      {"flip_prob", [](auto& c, auto& n, auto& v) { c.hyper.flip_prob = to_double(n, v); },
       [](auto& c) { return num(c.hyper.flip_prob); }},
      {"shadow_prob", [](auto& c, auto& n, auto& v) { c.hyper.shadow_prob = to_double(n, v); },
       [](auto& c) { return num(c.hyper.shadow_prob); }},
      {"seed", [](auto& c, auto& n, auto& v) { c.hyper.seed = to_u64(n, v); },
       [](auto& c) { return std::to_string(c.hyper.seed); }},
      {"constant_throttle", [](auto& c, auto& n, auto& v) { c.constant_throttle = to_double(n, v); },
       [](auto& c) { return num(c.constant_throttle); }},
      {"driver_throttle", [](auto& c, auto& n, auto& v) { c.driver_throttle = to_double(n, v); },
       [](auto& c) { return num(c.driver_throttle); }},
      {"lookahead", [](auto& c, auto& n, auto& v) { c.lookahead = to_double(n, v); },
       [](auto& c) { return num(c.lookahead); }},
      {"left_threshold", [](auto& c, auto& n, auto& v) { c.left_threshold = to_double(n, v); },
       [](auto& c) { return num(c.left_threshold); }},
      {"left_lane_offset", [](auto& c, auto& n, auto& v) { c.left_lane_offset = to_double(n, v); },
       [](auto& c) { return num(c.left_lane_offset); }},
      {"disturbance_sigma", [](auto& c, auto& n, auto& v) { c.disturbance.sigma = to_double(n, v); },
       [](auto& c) { return num(c.disturbance.sigma); }},
      {"disturbance_time_constant",
       [](auto& c, auto& n, auto& v) { c.disturbance.time_constant = to_double(n, v); },
       [](auto& c) { return num(c.disturbance.time_constant); }},
      {"control_rate_hz", [](auto& c, auto& n, auto& v) { c.control_rate_hz = to_double(n, v); },
       [](auto& c) { return num(c.control_rate_hz); }},
  };
  return k;
}

}  // namespace

void StackConfig::validate() const {
  rover.validate();
  hyper.validate();
  if (preprocess.crop_top < 0 || preprocess.crop_top >= preprocess.reference_height)
    throw ConfigError("crop_top must be within the reference frame height");
  if (!(constant_throttle >= 0.0 && constant_throttle <= 1.0))
    throw ConfigError("constant_throttle must be in [0, 1]");
  if (!(driver_throttle >= 0.0 && driver_throttle <= 1.0)) throw ConfigError("driver_throttle must be in [0, 1]");
  if (!(lookahead > 0.0)) throw ConfigError("lookahead must be positive");
  if (!(left_threshold >= 0.0 && left_threshold <= 1.0)) throw ConfigError("left_threshold must be in [0, 1]");
  if (!(std::abs(left_lane_offset) <= rover.vehicle.wheelbase))
    throw ConfigError("left_lane_offset must be within one wheelbase of the centerline");
  if (!(disturbance.sigma >= 0.0) || !(disturbance.time_constant > 0.0))
    throw ConfigError("disturbance needs sigma >= 0 and a positive time constant");
  if (!(control_rate_hz > 0.0)) throw ConfigError("control_rate_hz must be positive");
}

std::map<std::string, std::string> parse_kv(const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + " line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + " line " + std::to_string(lineno) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out[key] = value;
  }
  return out;
}

void apply_setting(StackConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& k : keys()) {
    if (key == k.name) {
      k.set(cfg, key, value);
      return;
    }
  }
  throw ConfigError("unknown setting '" + key + "'");
}

StackConfig from_text(const std::string& text) {
  StackConfig cfg;
  for (const auto& [k, v] : parse_kv(text)) apply_setting(cfg, k, v);
  cfg.validate();
  return cfg;
}

StackConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  StackConfig cfg;
  for (const auto& [k, v] : parse_kv(ss.str(), path.string())) apply_setting(cfg, k, v);
  cfg.validate();
  return cfg;
}

std::string to_text(const StackConfig& cfg) {
  std::string out;
  for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(cfg) + "\n";
  return out;
}

}  // namespace rolle::config
