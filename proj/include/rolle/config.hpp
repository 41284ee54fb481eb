#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "rolle/autopilot.hpp"
#include "rolle/learning/batch_generator.hpp"
#include "rolle/perception.hpp"
#include "rolle/sim_drive.hpp"
#include "rolle/transport/socket.hpp"

namespace rolle::config {

struct StackConfig {
  transport::Endpoint broker{"127.0.0.1", 1883};
  transport::Endpoint telemetry{"127.0.0.1", 5005};
  sim_drive::RoverConfig rover;
  perception::PreprocessConfig preprocess;
  std::string track = "s-curve";
  learning::Hyperparams hyper;
  double constant_throttle = 0.25;
  double driver_throttle = 0.25;
  double lookahead = 0.4;
  double left_threshold = 0.3;
  double left_lane_offset = 0.08;
  sim_drive::DisturbanceParams disturbance{0.1, 1.0, 0};
  double control_rate_hz = 20.0;

  // Throws ConfigError naming the offending setting.
  void validate() const;
};

// Flat `key = value` document; `#` starts a comment, string values may be
// double-quoted. Malformed lines throw ConfigError citing the line number.
std::map<std::string, std::string> parse_kv(const std::string& text, const std::string& origin = "config");

// Applies one setting; throws ConfigError for unknown keys or bad values.
void apply_setting(StackConfig& cfg, const std::string& key, const std::string& value);

StackConfig load_config(const std::filesystem::path& path);
StackConfig from_text(const std::string& text);

// Every recognised key with its current value, in file syntax.
std::string to_text(const StackConfig& cfg);

}  // namespace rolle::config
