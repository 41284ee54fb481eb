#include "rolle/datalog.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "rolle/errors.hpp"
#include "rolle/png_io.hpp"

namespace rolle::datalog {

namespace fs = std::filesystem;

double quantize4(double v) {
  const double q = static_cast<double>(std::llround(v * 10000.0)) / 10000.0;
  return q == 0.0 ? 0.0 : q;
}

std::string format4(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", quantize4(v));
  return buf;
}

std::string frame_file_name(std::size_t index, std::uint64_t timestamp_ms) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "%s/frame_%06zu_%llu.png", kFramesDir, index,
                static_cast<unsigned long long>(timestamp_ms));
  return buf;
}

std::string manifest_csv(std::span<const DriveRecord> records) {
  std::string out = kManifestHeader;
  out += '\n';
  for (const auto& r : records) {
    out += r.frame_path;
    out += ',';
    out += format4(r.steering);
    out += ',';
    out += format4(r.throttle);
    out += ',';
    out += std::to_string(r.timestamp_ms);
    out += '\n';
  }
  return out;
}

void write_manifest(const fs::path& path, std::span<const DriveRecord> records) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  const auto text = manifest_csv(records);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  f.close();
  if (!f) throw RecordError("failed writing " + path.string());
}

void write_meta(const fs::path& path, const RunMeta& meta) {
  nlohmann::json j;
  j["track"] = meta.track;
  j["fps"] = meta.fps;
  j["start_time"] = meta.start_time;
  j["version"] = meta.version;
  if (meta.error) j["error"] = *meta.error;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << j.dump(2) << '\n';
  f.close();
  if (!f) throw RecordError("failed writing " + path.string());
}

namespace {

std::string utc_now_iso() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunMeta read_meta(const fs::path& path) {
  RunMeta meta;
  std::ifstream f(path);
  if (!f) return meta;
  try {
    const auto j = nlohmann::json::parse(f);
    meta.track = j.value("track", "");
    meta.fps = j.value("fps", 32.0);
    meta.start_time = j.value("start_time", "");
    meta.version = j.value("version", "");
    if (j.contains("error")) meta.error = j.at("error").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return meta;
}

double parse_value(std::string_view field, const char* what, const fs::path& file, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ValidationError(file.string() + " line " + std::to_string(line) + ": " + what + " is not a number");
  if (v < -1.0 || v > 1.0)
    throw ValidationError(file.string() + " line " + std::to_string(line) + ": " + what + " " +
                          std::string(field) + " outside [-1, 1]");
  return v;
}

}  // namespace

Dataset record_run(FrameSource& source, const LatestValue<control::ControlCommand>& command,
                   const fs::path& out_dir, const RecordOptions& options) {
  Dataset ds;
  ds.root = out_dir;
  ds.meta.track = options.track;
  ds.meta.fps = options.fps;
  ds.meta.start_time = utc_now_iso();
  std::error_code ec;
  fs::create_directories(out_dir / kFramesDir, ec);
  if (ec) throw RecordError("cannot create " + (out_dir / kFramesDir).string() + ": " + ec.message());

  std::uint64_t last_ts = 0;
  try {
    while (!options.max_frames || ds.records.size() < *options.max_frames) {
      auto frame = source.next();
      if (!frame) break;
      const auto cmd = command.load().clamped();
      // Timestamps stay non-decreasing even if the source clock steps back.
      const std::uint64_t ts = std::max(last_ts, frame->timestamp_ms);
      last_ts = ts;
      DriveRecord rec;
      rec.frame_path = frame_file_name(ds.records.size(), ts);
      rec.steering = quantize4(cmd.steering);
      rec.throttle = quantize4(cmd.throttle);
      rec.timestamp_ms = ts;
      write_png(out_dir / rec.frame_path, *frame);
      ds.records.push_back(std::move(rec));
    }
  } catch (const std::exception& e) {
    ds.meta.error = e.what();
    spdlog::error("recording aborted after {} frames: {}", ds.records.size(), e.what());
    try {
      write_manifest(out_dir / kManifestName, ds.records);
      write_meta(out_dir / kMetaName, ds.meta);
    } catch (const std::exception& e2) {
      spdlog::error("could not flush partial run: {}", e2.what());
    }
    throw RecordError(std::string("recording aborted: ") + e.what());
  }
  write_manifest(out_dir / kManifestName, ds.records);
  write_meta(out_dir / kMetaName, ds.meta);
  return ds;
}

Dataset load_dataset(const fs::path& dir) {
  const fs::path manifest = dir / kManifestName;
  std::ifstream f(manifest, std::ios::binary);
  if (!f) throw LoadError("missing manifest " + manifest.string());
  Dataset ds;
  ds.root = dir;
  ds.meta = read_meta(dir / kMetaName);
  std::string line;
  if (!std::getline(f, line) || line != kManifestHeader)
    throw ValidationError(manifest.string() + " line 1: expected header '" + kManifestHeader + "'");
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 4)
      throw ValidationError(manifest.string() + " line " + std::to_string(lineno) + ": expected 4 fields");
    DriveRecord r;
    r.frame_path = std::string(fields[0]);
    r.steering = parse_value(fields[1], "steering", manifest, lineno);
    r.throttle = parse_value(fields[2], "throttle", manifest, lineno);
    unsigned long long ts = 0;
    auto [ptr, ec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), ts);
    if (ec != std::errc() || ptr != fields[3].data() + fields[3].size())
      throw ValidationError(manifest.string() + " line " + std::to_string(lineno) + ": bad timestamp_ms");
    r.timestamp_ms = ts;
    if (r.frame_path.empty() || !fs::is_regular_file(dir / r.frame_path))
      throw LoadError("missing frame file " + (dir / r.frame_path).string() + " (line " +
                      std::to_string(lineno) + ")");
    ds.records.push_back(std::move(r));
  }
  std::stable_sort(ds.records.begin(), ds.records.end(),
                   [](const DriveRecord& a, const DriveRecord& b) { return a.timestamp_ms < b.timestamp_ms; });
  return ds;
}

std::vector<learning::Example> load_examples(const Dataset& ds) {
  std::vector<learning::Example> out;
  out.reserve(ds.records.size());
  for (const auto& r : ds.records) {
    learning::Example e;
    e.frame = read_png(ds.root / r.frame_path);
    e.frame.timestamp_ms = r.timestamp_ms;
    e.steering = static_cast<float>(r.steering);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::uint64_t> steering_histogram(std::span<const double> values, int bins) {
  if (bins < 1) throw ConfigError("histogram needs at least one bin");
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    if (std::isnan(v)) v = 0.0;
    v = std::clamp(v, -1.0, 1.0);
    auto b = static_cast<long long>(std::floor((v + 1.0) / 2.0 * bins));
    b = std::clamp<long long>(b, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  return counts;
}

}  // namespace rolle::datalog
