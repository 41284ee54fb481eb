#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rolle/control.hpp"
#include "rolle/image.hpp"
#include "rolle/latest_value.hpp"
#include "rolle/learning/augment.hpp"

namespace rolle::datalog {

inline constexpr const char* kManifestName = "manifest.csv";
inline constexpr const char* kMetaName = "meta.json";
inline constexpr const char* kFramesDir = "frames";
inline constexpr const char* kManifestHeader = "frame_path,steering,throttle,timestamp_ms";
inline constexpr const char* kSoftwareVersion = "0.1.0";

struct DriveRecord {
  std::string frame_path;  // relative to the run root
  double steering = 0.0;
  double throttle = 0.0;
  std::uint64_t timestamp_ms = 0;
  friend bool operator==(const DriveRecord&, const DriveRecord&) = default;
};

struct RunMeta {
  std::string track;
  double fps = 32.0;
  std::string start_time;  // ISO 8601 UTC
  std::string version = kSoftwareVersion;
  std::optional<std::string> error;
  friend bool operator==(const RunMeta&, const RunMeta&) = default;
};

struct Dataset {
  std::filesystem::path root;
  std::vector<DriveRecord> records;
  RunMeta meta;
};

// Produces camera frames with their capture timestamps; nullopt ends the run.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::optional<ImageFrame> next() = 0;
};

// Rounds to the 4-decimal grid used by the manifest; -0 becomes 0.
double quantize4(double v);
std::string format4(double v);

// `frames/frame_<6-digit index>_<timestamp_ms>.png`
std::string frame_file_name(std::size_t index, std::uint64_t timestamp_ms);

struct RecordOptions {
  std::string track;
  double fps = 32.0;
  std::optional<std::size_t> max_frames;
};

// Pairs every frame with the latest command at capture time. On a write
// failure the manifest so far is flushed, meta.json carries the error and
// RecordError is thrown.
Dataset record_run(FrameSource& source, const LatestValue<control::ControlCommand>& command,
                   const std::filesystem::path& out_dir, const RecordOptions& options = {});

std::string manifest_csv(std::span<const DriveRecord> records);
void write_manifest(const std::filesystem::path& path, std::span<const DriveRecord> records);
void write_meta(const std::filesystem::path& path, const RunMeta& meta);

// Throws LoadError for a missing manifest or frame file and ValidationError
// (citing the line) for malformed rows or out-of-range values.
Dataset load_dataset(const std::filesystem::path& dir);

// Decodes every frame; steering labels as float.
std::vector<learning::Example> load_examples(const Dataset& ds);

// Uniform bins over [-1, 1]; bin = floor((v + 1) / 2 * bins), the last bin
// is closed on the right. Values outside the range are clamped in.
std::vector<std::uint64_t> steering_histogram(std::span<const double> values, int bins);

}  // namespace rolle::datalog
