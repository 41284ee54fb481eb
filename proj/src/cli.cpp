#include "rolle/cli.hpp"

#include <poll.h>
#include <termios.h>
#include <unistd.h>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "rolle/autopilot.hpp"
#include "rolle/config.hpp"
#include "rolle/datalog.hpp"
#include "rolle/errors.hpp"
#include "rolle/learning/model_io.hpp"
#include "rolle/sim_drive.hpp"
#include "rolle/transport/broker.hpp"
#include "rolle/transport/control_payload.hpp"
#include "rolle/transport/frame_stream.hpp"
#include "rolle/transport/mqtt_client.hpp"

namespace rolle::cli {

namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted.store(true); }

// Turns SIGINT/SIGTERM into a stop request for the running subcommand.
class InterruptScope {
 public:
  InterruptScope() {
    g_interrupted.store(false);
    prev_int_ = std::signal(SIGINT, on_signal);
    prev_term_ = std::signal(SIGTERM, on_signal);
    watcher_ = std::jthread([this](std::stop_token st) {
      while (!st.stop_requested()) {
        if (g_interrupted.load()) {
          source_.request_stop();
          return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
    });
  }
  ~InterruptScope() {
    watcher_.request_stop();
    watcher_.join();
    std::signal(SIGINT, prev_int_);
    std::signal(SIGTERM, prev_term_);
  }
  std::stop_token token() const { return source_.get_token(); }
  void request_stop() { source_.request_stop(); }

 private:
  std::stop_source source_;
  std::jthread watcher_;
  void (*prev_int_)(int) = SIG_DFL;
  void (*prev_term_)(int) = SIG_DFL;
};

// Raw, non-echoing stdin for the keyboard soft pilot.
class RawTerminal {
 public:
  RawTerminal() {
    if (!isatty(STDIN_FILENO)) return;
    if (tcgetattr(STDIN_FILENO, &saved_) != 0) return;
    termios raw = saved_;
    raw.c_lflag &= static_cast<tcflag_t>(~(ICANON | ECHO));
    raw.c_cc[VMIN] = 0;
    raw.c_cc[VTIME] = 0;
    active_ = tcsetattr(STDIN_FILENO, TCSANOW, &raw) == 0;
  }
  ~RawTerminal() {
    if (active_) tcsetattr(STDIN_FILENO, TCSANOW, &saved_);
  }

 private:
  termios saved_{};
  bool active_ = false;
};

// Reads keys until 'q', EOF or stop; arrows and WASD steer, space centres.
void keyboard_loop(LatestValue<control::ControlCommand>& cell, std::stop_token stop,
                   const std::function<void()>& on_quit) {
  RawTerminal term;
  std::string pending;
  while (!stop.stop_requested()) {
    pollfd pfd{STDIN_FILENO, POLLIN, 0};
    if (poll(&pfd, 1, 50) <= 0) continue;
    char buf[16];
    const ssize_t n = ::read(STDIN_FILENO, buf, sizeof buf);
    if (n <= 0) {
      on_quit();
      return;
    }
    pending.append(buf, static_cast<std::size_t>(n));
    while (!pending.empty()) {
      control::Key key = control::Key::other;
      std::size_t used = 1;
      const char c = pending[0];
      if (c == '\x1b') {
        if (pending.size() < 3) break;
        used = 3;
        switch (pending[2]) {
          case 'A': key = control::Key::up; break;
          case 'B': key = control::Key::down; break;
          case 'C': key = control::Key::right; break;
          case 'D': key = control::Key::left; break;
          default: break;
        }
      } else if (c == 'q' || c == 'Q') {
        on_quit();
        return;
      } else if (c == 'a' || c == 'A') {
        key = control::Key::left;
      } else if (c == 'd' || c == 'D') {
        key = control::Key::right;
      } else if (c == 'w' || c == 'W') {
        key = control::Key::up;
      } else if (c == 's' || c == 'S') {
        key = control::Key::down;
      } else if (c == ' ') {
        key = control::Key::space;
      }
      pending.erase(0, used);
      if (key != control::Key::other) cell.store(control::softpilot_step(key, cell.load()));
    }
  }
}

void publish_command(transport::MessagePublisher& bus, const control::ControlCommand& c) {
  bus.publish(transport::kSteeringTopic, transport::encode_control(c.steering));
  bus.publish(transport::kThrottleTopic, transport::encode_control(c.throttle));
}

// Rover end of the MQTT link: subscribes to both control topics and exposes
// the latest received command plus the failsafe view used for actuation.
struct RoverLink {
  transport::MqttClient client;
  control::CommandReceiver receiver;
  LatestValue<control::ControlCommand> latest;

  explicit RoverLink(const transport::Endpoint& broker)
      : client(transport::MqttClient::connect(broker, {"rolle-rover", std::chrono::seconds(30),
                                                       std::chrono::milliseconds(3000)})) {
    auto handler = [this](const std::string& topic, const std::string& payload) {
      receiver.on_message(topic, payload);
      latest.store(receiver.current());
    };
    client.subscribe(std::string(transport::kSteeringTopic), handler);
    client.subscribe(std::string(transport::kThrottleTopic), handler);
  }
};

class StoppableSource : public datalog::FrameSource {
 public:
  StoppableSource(datalog::FrameSource& inner, std::stop_token stop) : inner_(inner), stop_(std::move(stop)) {}
  std::optional<ImageFrame> next() override {
    if (stop_.stop_requested()) return std::nullopt;
    return inner_.next();
  }

 private:
  datalog::FrameSource& inner_;
  std::stop_token stop_;
};

std::string fmt4(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", datalog::quantize4(v));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  f.close();
  if (!f) throw RecordError("cannot write " + path.string());
}

struct Common {
  std::string config_path;
  std::vector<std::string> settings;  // --set key=value
};

config::StackConfig resolve_config(const Common& common) {
  std::string path = common.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("ROLLE_CONFIG")) path = env;
  }
  config::StackConfig cfg;
  if (!path.empty()) cfg = config::load_config(path);
  for (const auto& s : common.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    config::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  return cfg;
}

}  // namespace

SteeringHistExport steering_hist_export(std::span<const double> steering, int bins,
                                        const learning::Hyperparams& h) {
  SteeringHistExport e;
  e.bins = bins;
  e.flip_prob = h.flip_prob;
  e.seed = h.seed;
  for (int i = 0; i <= bins; ++i) e.edges.push_back(-1.0 + 2.0 * i / bins);
  e.counts_before = datalog::steering_histogram(steering, bins);
  double sum = 0.0;
  for (double v : steering) sum += v;
  e.mean_before = steering.empty() ? 0.0 : sum / static_cast<std::uint64_t>(steering.size());
  if (steering.empty()) {
    e.counts_after.assign(static_cast<std::size_t>(bins), 0);
    return e;
  }
  std::vector<float> labels(steering.begin(), steering.end());
  const auto stream = learning::label_stream(labels, h, learning::derive_seed(h.seed, learning::kGeneratorSeed));
  std::vector<double> after(stream.begin(), stream.end());
  e.counts_after = datalog::steering_histogram(after, bins);
  double s2 = 0.0;
  for (double v : after) s2 += v;
  e.mean_after = after.empty() ? 0.0 : s2 / static_cast<double>(after.size());
  return e;
}

std::string history_json(const learning::TrainHistory& history) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : history) {
    nlohmann::ordered_json e;
    e["epoch"] = r.epoch;
    e["train_mse"] = r.train_mse;
    if (std::isfinite(r.val_mse)) e["val_mse"] = r.val_mse;
    else e["val_mse"] = nullptr;
    j.push_back(e);
  }
  return j.dump(2) + "\n";
}

std::string steering_hist_json(const SteeringHistExport& e) {
  nlohmann::ordered_json j;
  j["bins"] = e.bins;
  j["edges"] = e.edges;
  j["counts_before"] = e.counts_before;
  j["counts_after"] = e.counts_after;
  j["mean_before"] = e.mean_before;
  j["mean_after"] = e.mean_after;
  j["flip_prob"] = e.flip_prob;
  j["seed"] = e.seed;
  return j.dump(2) + "\n";
}

std::string format4_json(const std::vector<std::pair<std::string, JsonValue>>& fields) {
  std::string out = "{";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ", ";
    out += "\"" + fields[i].first + "\": ";
    if (const auto* d = std::get_if<double>(&fields[i].second)) out += fmt4(*d);
    else out += std::to_string(std::get<std::uint64_t>(fields[i].second));
  }
  return out + "}";
}

namespace {

int cmd_broker(const config::StackConfig& cfg, std::optional<std::string> listen) {
  const auto at = listen ? transport::Endpoint::parse(*listen) : cfg.broker;
  InterruptScope interrupt;
  auto broker = transport::Broker::serve(at);
  spdlog::info("broker listening on {}:{}", at.host, broker->port());
  std::cout << "listening " << at.host << ":" << broker->port() << std::endl;
  while (!interrupt.token().stop_requested()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  broker->stop();
  const auto s = broker->stats();
  spdlog::info("broker stopped: {} sessions, {} received, {} delivered", s.sessions_accepted, s.messages_received,
               s.messages_delivered);
  return kExitOk;
}

struct DriveArgs {
  std::string out;
  std::string driver = "oracle";
  double duration = 60.0;
  bool use_broker = false;
  bool realtime = false;
};

int cmd_drive(const config::StackConfig& cfg, const DriveArgs& a) {
  const auto world = sim::build_track(sim::TrackSpec::parse(cfg.track));
  sim_drive::DisturbanceParams dist = cfg.disturbance;
  dist.seed = learning::derive_seed(cfg.hyper.seed, 11);
  sim_drive::SimRover rover(world, cfg.rover, dist);
  InterruptScope interrupt;

  std::unique_ptr<sim_drive::Driver> driver;
  if (a.driver == "oracle") {
    driver = std::make_unique<sim_drive::OracleDriver>(cfg.lookahead, cfg.driver_throttle, cfg.rover.vehicle);
  } else if (a.driver == "left") {
    driver = std::make_unique<sim_drive::LeftBiasedDriver>(cfg.lookahead, cfg.driver_throttle, cfg.left_threshold,
                                                           cfg.left_lane_offset, cfg.rover.vehicle);
  } else if (a.driver != "keyboard") {
    throw ConfigError("unknown driver '" + a.driver + "' (oracle, left, keyboard)");
  }
  const bool keyboard = !driver;
  const bool realtime = a.realtime || keyboard || a.use_broker;
  const std::size_t frames = a.duration > 0.0 ? sim_drive::frame_count(a.duration, cfg.rover.fps)
                                              : std::numeric_limits<std::size_t>::max();

  LatestValue<control::ControlCommand> pilot;  // what the driver commands
  std::optional<RoverLink> link;
  std::optional<transport::MqttClient> pilot_client;
  std::jthread transmitter;
  std::jthread keys;
  if (a.use_broker) {
    link.emplace(cfg.broker);
    pilot_client.emplace(transport::MqttClient::connect(
        cfg.broker, {"rolle-pilot", std::chrono::seconds(30), std::chrono::milliseconds(3000)}));
  }
  if (keyboard) {
    std::cerr << "arrows/WASD steer and throttle, space centres, q stops\n";
    keys = std::jthread([&](std::stop_token st) { keyboard_loop(pilot, st, [&] { interrupt.request_stop(); }); });
    if (pilot_client) {
      transmitter = std::jthread([&](std::stop_token st) {
        control::TransmitOptions opt;
        opt.rate_hz = cfg.control_rate_hz;
        control::pilot_transmit_loop(pilot, *pilot_client, opt, st);
      });
    }
  }

  const LatestValue<control::ControlCommand>& recorded = link ? link->latest : pilot;
  std::function<control::ControlCommand()> actuation = [&] {
    return link ? link->receiver.current() : pilot.load();
  };
  std::function<void(const sim_drive::SimRover&)> before;
  if (driver) {
    before = [&](const sim_drive::SimRover& r) {
      const auto c = driver->command(r.world(), r.state());
      pilot.store(c);
      if (pilot_client) {
        try {
          publish_command(*pilot_client, c);
        } catch (const Error& e) {
          spdlog::warn("publish failed: {}", e.what());
        }
      }
    };
  }
  sim_drive::SimFrameSource sim_source(rover, frames, actuation, before, realtime);
  StoppableSource source(sim_source, interrupt.token());
  datalog::RecordOptions ro;
  ro.track = cfg.track;
  ro.fps = cfg.rover.fps;
  const auto ds = datalog::record_run(source, recorded, a.out, ro);
  if (keys.joinable()) keys.request_stop();
  if (transmitter.joinable()) transmitter.request_stop();
  if (pilot_client) publish_command(*pilot_client, {0.0, 0.0});
  double mean = 0.0;
  for (const auto& r : ds.records) mean += r.steering;
  if (!ds.records.empty()) mean /= static_cast<std::uint64_t>(ds.records.size());
  std::cout << format4_json({{"records", static_cast<std::uint64_t>(ds.records.size())},
                             {"distance_m", rover.distance()},
                             {"mean_steering", mean}})
            << std::endl;
  return kExitOk;
}

struct TrainArgs {
  std::string run;
  std::string out_dir;
};

int cmd_train(const config::StackConfig& cfg, const TrainArgs& a) {
  const auto ds = datalog::load_dataset(a.run);
  if (ds.records.empty()) throw EmptyDatasetError("run " + a.run + " has no records");
  const auto examples = datalog::load_examples(ds);
  InterruptScope interrupt;
  learning::TrainOptions opt;
  opt.preprocess = cfg.preprocess;
  auto token = interrupt.token();
  opt.cancelled = [token] { return token.stop_requested(); };
  const auto result = learning::train(examples, cfg.hyper, opt);
  const fs::path out = a.out_dir.empty() ? fs::path(a.run) : fs::path(a.out_dir);
  fs::create_directories(out);
  learning::write_history_csv(out / "history.csv", result.history);
  if (result.divergence) {
    spdlog::error("training stopped: {}", *result.divergence);
    return kExitRuntime;
  }
  learning::save_model(result.model, out / "model.rlle");
  const auto& last = result.history.back();
  std::cout << format4_json({{"epochs", static_cast<std::uint64_t>(result.history.size())},
                             {"train_mse", last.train_mse},
                             {"val_mse", last.val_mse}})
            << std::endl;
  return kExitOk;
}

struct AutopilotArgs {
  std::string model;
  double duration = 0.0;  // 0 runs until interrupted
  bool use_broker = false;
  bool telemetry = false;
  bool virtual_time = false;
};

int cmd_autopilot(const config::StackConfig& cfg, const AutopilotArgs& a) {
  const auto model = learning::load_model(a.model);
  const auto world = sim::build_track(sim::TrackSpec::parse(cfg.track));
  sim_drive::DisturbanceParams dist = cfg.disturbance;
  dist.sigma = 0.0;
  sim_drive::SimRover rover(world, cfg.rover, dist);
  InterruptScope interrupt;

  std::optional<RoverLink> link;
  std::optional<transport::MqttClient> pilot_client;
  if (a.use_broker) {
    link.emplace(cfg.broker);
    pilot_client.emplace(transport::MqttClient::connect(
        cfg.broker, {"rolle-autopilot", std::chrono::seconds(30), std::chrono::milliseconds(3000)}));
  }
  LatestValue<control::ControlCommand> cell;
  std::unique_ptr<transport::TelemetryServer> server;
  if (a.telemetry) {
    server = std::make_unique<transport::TelemetryServer>(cfg.telemetry);
    spdlog::info("telemetry on {}:{}", cfg.telemetry.host, server->port());
  }
  const std::size_t frames = a.duration > 0.0 ? sim_drive::frame_count(a.duration, cfg.rover.fps)
                                              : std::numeric_limits<std::size_t>::max();
  sim_drive::SimFrameSource source(rover, frames, [&] { return link ? link->receiver.current() : cell.load(); },
                                   {}, false);
  autopilot::AutopilotConfig ac;
  ac.model_path = a.model;
  ac.constant_throttle = cfg.constant_throttle;
  ac.fps = cfg.rover.fps;
  ac.telemetry = a.telemetry;
  ac.realtime = !a.virtual_time;
  ac.preprocess = cfg.preprocess;
  autopilot::TelemetryQueue::Sink sink;
  if (server) sink = [&](const transport::TelemetryFrame& f) { server->broadcast(f); };
  const auto stats = autopilot::autopilot_loop(
      source, model, ac,
      [&](const control::ControlCommand& c) {
        cell.store(c);
        if (pilot_client) {
          try {
            publish_command(*pilot_client, c);
          } catch (const Error& e) {
            spdlog::warn("publish failed: {}", e.what());
          }
        }
      },
      sink, interrupt.token());
  if (server) server->stop();
  std::cout << format4_json({{"ticks", static_cast<std::uint64_t>(stats.ticks)},
                             {"skipped_ticks", static_cast<std::uint64_t>(stats.skipped_ticks)},
                             {"telemetry_sent", static_cast<std::uint64_t>(stats.telemetry_sent)},
                             {"distance_m", rover.distance()}})
            << std::endl;
  return kExitOk;
}

int cmd_eval(const config::StackConfig& cfg, const std::string& model_path, double duration, bool noise) {
  const auto model = learning::load_model(model_path);
  const auto world = sim::build_track(sim::TrackSpec::parse(cfg.track));
  autopilot::AutopilotConfig ac;
  ac.model_path = model_path;
  ac.constant_throttle = cfg.constant_throttle;
  ac.fps = cfg.rover.fps;
  ac.preprocess = cfg.preprocess;
  sim_drive::DisturbanceParams dist = cfg.disturbance;
  dist.seed = learning::derive_seed(cfg.hyper.seed, 12);
  if (!noise) dist.sigma = 0.0;
  const auto m = autopilot::closed_loop_eval(world, model, ac, duration, cfg.rover, dist);
  std::cout << format4_json({{"distance_m", m.distance_m},
                             {"off_path_fraction", m.off_path_fraction},
                             {"mean_abs_steering", m.mean_abs_steering},
                             {"mean_left_offset_m", m.mean_left_offset_m}})
            << std::endl;
  return kExitOk;
}

int cmd_histogram(const config::StackConfig& cfg, const std::string& run, int bins, const std::string& out) {
  const auto ds = datalog::load_dataset(run);
  std::vector<double> steering;
  for (const auto& r : ds.records) steering.push_back(r.steering);
  const auto e = steering_hist_export(steering, bins, cfg.hyper);
  const fs::path path = out.empty() ? fs::path(run) / "steering_hist.json" : fs::path(out);
  write_text(path, steering_hist_json(e));
  std::cout << format4_json({{"records", static_cast<std::uint64_t>(steering.size())},
                             {"mean_before", e.mean_before},
                             {"mean_after", e.mean_after}})
            << std::endl;
  return kExitOk;
}

int cmd_export_history(const std::string& run, const std::string& out) {
  const fs::path csv = fs::path(run) / "history.csv";
  if (!fs::exists(csv)) throw LoadError("missing " + csv.string());
  const auto history = learning::read_history_csv(csv);
  const fs::path path = out.empty() ? fs::path(run) / "history.json" : fs::path(out);
  write_text(path, history_json(history));
  std::cout << format4_json({{"epochs", static_cast<std::uint64_t>(history.size())}}) << std::endl;
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"RolLE rover stack: broker, teleop recording, training, autopilot and evaluation", "rolle"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  Common common;
  app.add_option("--config", common.config_path, "Config file (default: $ROLLE_CONFIG)");
  app.add_option("--set", common.settings, "Override a config setting, key=value");
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

  // Flags override the config file; each one maps to a config key.
  std::vector<std::pair<std::string, std::string>> overrides;
  auto override_opt = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
  };

  auto* broker = app.add_subcommand("broker", "Run the MQTT broker until interrupted");
  std::string listen;
  broker->add_option("--listen", listen, "host:port (default from config)");

  auto* drive = app.add_subcommand("drive", "Drive the simulated rover and record a run");
  DriveArgs drive_args;
  drive->add_option("--out", drive_args.out, "Run directory to create")->required();
  drive->add_option("--driver", drive_args.driver, "oracle, left or keyboard")
      ->check(CLI::IsMember({"oracle", "left", "keyboard"}));
  drive->add_option("--duration", drive_args.duration, "Seconds to record (0: until q or interrupt)");
  drive->add_flag("--broker", drive_args.use_broker, "Send commands through the MQTT broker");
  drive->add_flag("--realtime", drive_args.realtime, "Pace frames on the wall clock");
  override_opt(drive, "--track", "track", "Track spec");
  override_opt(drive, "--seed", "seed", "Disturbance seed");
  override_opt(drive, "--disturbance", "disturbance_sigma", "Steering disturbance sigma in radians");
  override_opt(drive, "--fps", "fps", "Camera frame rate");
  override_opt(drive, "--throttle", "driver_throttle", "Scripted driver throttle");

  auto* train = app.add_subcommand("train", "Train a steering model on a recorded run");
  TrainArgs train_args;
  train->add_option("run", train_args.run, "Run directory")->required();
  train->add_option("--out-dir", train_args.out_dir, "Where to write model.rlle and history.csv (default: run)");
  override_opt(train, "--epochs", "epochs", "Epochs");
  override_opt(train, "--lr", "learning_rate", "Learning rate");
  override_opt(train, "--samples-per-epoch", "samples_per_epoch", "Generated samples per epoch");
  override_opt(train, "--batch-size", "batch_size", "Batch size");
  override_opt(train, "--train-fraction", "train_fraction", "Training share of the split");
  override_opt(train, "--flip-prob", "flip_prob", "Flip probability");
  override_opt(train, "--shadow-prob", "shadow_prob", "Shadow probability");
  override_opt(train, "--seed", "seed", "Seed");

  auto* autopilot_cmd = app.add_subcommand("autopilot", "Drive the simulated rover with a model");
  AutopilotArgs ap_args;
  autopilot_cmd->add_option("model", ap_args.model, "Model file")->required();
  autopilot_cmd->add_option("--duration", ap_args.duration, "Seconds to drive (0: until interrupted)");
  autopilot_cmd->add_flag("--broker", ap_args.use_broker, "Send commands through the MQTT broker");
  autopilot_cmd->add_flag("--telemetry", ap_args.telemetry, "Stream frames to viewers");
  autopilot_cmd->add_flag("--virtual-time", ap_args.virtual_time, "Run as fast as possible");
  override_opt(autopilot_cmd, "--track", "track", "Track spec");
  override_opt(autopilot_cmd, "--throttle", "constant_throttle", "Constant throttle");

  auto* eval = app.add_subcommand("eval", "Closed-loop evaluation, prints metrics as JSON");
  std::string eval_model;
  double eval_duration = 45.0;
  bool eval_noise = false;
  eval->add_option("model", eval_model, "Model file")->required();
  eval->add_option("--duration", eval_duration, "Simulated seconds")->check(CLI::PositiveNumber);
  eval->add_flag("--noise", eval_noise, "Apply the steering disturbance during evaluation");
  override_opt(eval, "--track", "track", "Track spec");
  override_opt(eval, "--throttle", "constant_throttle", "Constant throttle");
  override_opt(eval, "--seed", "seed", "Disturbance seed");

  auto* hist = app.add_subcommand("histogram", "Write steering_hist.json for a run");
  std::string hist_run, hist_out;
  int bins = 21;
  hist->add_option("run", hist_run, "Run directory")->required();
  hist->add_option("--bins", bins, "Bin count")->check(CLI::PositiveNumber);
  hist->add_option("--out", hist_out, "Output path (default: <run>/steering_hist.json)");
  override_opt(hist, "--flip-prob", "flip_prob", "Flip probability of the label stream");
  override_opt(hist, "--samples", "samples_per_epoch", "Label stream length");
  override_opt(hist, "--seed", "seed", "Seed");

  auto* exp = app.add_subcommand("export-history", "Write history.json from a run's history.csv");
  std::string exp_run, exp_out;
  exp->add_option("run", exp_run, "Directory holding history.csv")->required();
  exp->add_option("--out", exp_out, "Output path (default: <run>/history.json)");

  std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    spdlog::set_level(spdlog::level::from_str(log_level));
    auto cfg = resolve_config(common);
    for (const auto& [k, v] : overrides) config::apply_setting(cfg, k, v);
    cfg.validate();
    if (broker->parsed()) return cmd_broker(cfg, listen.empty() ? std::nullopt : std::optional(listen));
    if (drive->parsed()) return cmd_drive(cfg, drive_args);
    if (train->parsed()) return cmd_train(cfg, train_args);
    if (autopilot_cmd->parsed()) return cmd_autopilot(cfg, ap_args);
    if (eval->parsed()) return cmd_eval(cfg, eval_model, eval_duration, eval_noise);
    if (hist->parsed()) return cmd_histogram(cfg, hist_run, bins, hist_out);
    if (exp->parsed()) return cmd_export_history(exp_run, exp_out);
  } catch (const ConfigError& e) {
    std::cerr << "rolle: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "rolle: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args);
}

}  // namespace rolle::cli
