#pragma once

#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "rolle/transport/socket.hpp"

namespace rolle::transport {

// One visualization frame on the telemetry socket.
struct TelemetryFrame {
  std::uint64_t timestamp_ms = 0;
  float steering = 0.0f;
  float throttle = 0.0f;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;  // RGB8, row-major

  friend bool operator==(const TelemetryFrame&, const TelemetryFrame&) = default;
};

inline constexpr std::size_t kTelemetryHeaderBytes = 24;

class ByteSink {
 public:
  virtual ~ByteSink() = default;
  virtual void write(std::span<const std::uint8_t> bytes) = 0;
};

class ByteSource {
 public:
  virtual ~ByteSource() = default;
  // Returns 0 only at end of stream.
  virtual std::size_t read(std::span<std::uint8_t> buf) = 0;
};

class VectorSink final : public ByteSink {
 public:
  void write(std::span<const std::uint8_t> bytes) override {
    data.insert(data.end(), bytes.begin(), bytes.end());
  }
  std::vector<std::uint8_t> data;
};

class SpanSource final : public ByteSource {
 public:
  explicit SpanSource(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::size_t read(std::span<std::uint8_t> buf) override;

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

class OstreamSink final : public ByteSink {
 public:
  explicit OstreamSink(std::ostream& out) : out_(out) {}
  void write(std::span<const std::uint8_t> bytes) override;

 private:
  std::ostream& out_;
};

class IstreamSource final : public ByteSource {
 public:
  explicit IstreamSource(std::istream& in) : in_(in) {}
  std::size_t read(std::span<std::uint8_t> buf) override;

 private:
  std::istream& in_;
};

class SocketSink final : public ByteSink {
 public:
  explicit SocketSink(const Socket& s) : socket_(s) {}
  void write(std::span<const std::uint8_t> bytes) override { send_all(socket_, bytes); }

 private:
  const Socket& socket_;
};

class SocketSource final : public ByteSource {
 public:
  explicit SocketSource(const Socket& s) : socket_(s) {}
  std::size_t read(std::span<std::uint8_t> buf) override { return recv_some(socket_, buf); }

 private:
  const Socket& socket_;
};

// Wire layout: u32 BE payload length, then u64 BE timestamp_ms, f32 BE
// steering, f32 BE throttle, u32 BE width, u32 BE height, RGB8 bytes.
std::vector<std::uint8_t> encode_frame(const TelemetryFrame& f);
void frame_stream_write(ByteSink& sink, const TelemetryFrame& f);
// nullopt on a clean end of stream at a frame boundary. Throws
// TruncatedStreamError on EOF mid-frame and StreamCorruptError when the
// length prefix disagrees with the header.
std::optional<TelemetryFrame> frame_stream_read(ByteSource& source);

// Listens for viewers and broadcasts every frame to each connected one.
// Viewers whose socket fails are dropped.
class TelemetryServer {
 public:
  explicit TelemetryServer(const Endpoint& listen_at);
  ~TelemetryServer();
  TelemetryServer(const TelemetryServer&) = delete;
  TelemetryServer& operator=(const TelemetryServer&) = delete;

  std::uint16_t port() const { return port_; }
  std::size_t viewer_count() const;
  void broadcast(const TelemetryFrame& f);
  void stop();

 private:
  Socket listener_;
  std::uint16_t port_;
  std::thread accept_thread_;
  mutable std::mutex mu_;
  std::vector<Socket> viewers_;
  bool stopped_ = false;
};

}  // namespace rolle::transport
