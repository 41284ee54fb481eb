#include "rolle/transport/frame_stream.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "rolle/errors.hpp"

namespace rolle::transport {
namespace {

constexpr std::uint32_t kMaxPayload = 256u << 20;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}
std::uint32_t get_u32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}
std::uint64_t get_u64(const std::uint8_t* p) {
  return (std::uint64_t{get_u32(p)} << 32) | get_u32(p + 4);
}

// Reads exactly buf.size() bytes. Returns false when EOF hits before the
// first byte; throws TruncatedStreamError when it hits later.
bool read_exact(ByteSource& src, std::span<std::uint8_t> buf, bool eof_ok) {
  std::size_t got = 0;
  while (got < buf.size()) {
    const auto n = src.read(buf.subspan(got));
    if (n == 0) {
      if (got == 0 && eof_ok) return false;
      throw TruncatedStreamError("frame stream ended mid-frame after " + std::to_string(got) +
                                 " of " + std::to_string(buf.size()) + " bytes");
    }
    got += n;
  }
  return true;
}

}  // namespace

std::size_t SpanSource::read(std::span<std::uint8_t> buf) {
  const auto n = std::min(buf.size(), bytes_.size() - pos_);
  std::memcpy(buf.data(), bytes_.data() + pos_, n);
  pos_ += n;
  return n;
}

void OstreamSink::write(std::span<const std::uint8_t> bytes) {
  out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out_) throw SocketError("output stream write failed");
}

std::size_t IstreamSource::read(std::span<std::uint8_t> buf) {
  in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  return static_cast<std::size_t>(in_.gcount());
}

std::vector<std::uint8_t> encode_frame(const TelemetryFrame& f) {
  const std::uint64_t expected = std::uint64_t{f.width} * f.height * 3;
  if (f.pixels.size() != expected)
    throw StreamCorruptError("telemetry frame pixel count disagrees with its dimensions");
  const std::uint64_t payload = kTelemetryHeaderBytes + expected;
  if (payload > kMaxPayload) throw StreamCorruptError("telemetry frame too large");

  std::vector<std::uint8_t> out;
  out.reserve(4 + payload);
  put_u32(out, static_cast<std::uint32_t>(payload));
  put_u64(out, f.timestamp_ms);
  put_u32(out, std::bit_cast<std::uint32_t>(f.steering));
  put_u32(out, std::bit_cast<std::uint32_t>(f.throttle));
  put_u32(out, f.width);
  put_u32(out, f.height);
  out.insert(out.end(), f.pixels.begin(), f.pixels.end());
  return out;
}

void frame_stream_write(ByteSink& sink, const TelemetryFrame& f) { sink.write(encode_frame(f)); }

std::optional<TelemetryFrame> frame_stream_read(ByteSource& source) {
  std::uint8_t prefix[4];
  if (!read_exact(source, prefix, true)) return std::nullopt;
  const std::uint32_t payload = get_u32(prefix);
  if (payload < kTelemetryHeaderBytes || payload > kMaxPayload)
    throw StreamCorruptError("implausible frame length " + std::to_string(payload));

  std::uint8_t header[kTelemetryHeaderBytes];
  read_exact(source, header, false);
  TelemetryFrame f;
  f.timestamp_ms = get_u64(header);
  f.steering = std::bit_cast<float>(get_u32(header + 8));
  f.throttle = std::bit_cast<float>(get_u32(header + 12));
  f.width = get_u32(header + 16);
  f.height = get_u32(header + 20);
  const std::uint64_t pixel_bytes = std::uint64_t{f.width} * f.height * 3;
  if (kTelemetryHeaderBytes + pixel_bytes != payload)
    throw StreamCorruptError("frame length " + std::to_string(payload) + " disagrees with " +
                             std::to_string(f.width) + "x" + std::to_string(f.height) + " header");
  f.pixels.resize(pixel_bytes);
  read_exact(source, f.pixels, false);
  return f;
}

TelemetryServer::TelemetryServer(const Endpoint& listen_at)
    : listener_(listen_tcp(listen_at)), port_(bound_port(listener_)) {
  accept_thread_ = std::thread([this] {
    for (;;) {
      Socket viewer = accept_tcp(listener_);
      if (!viewer.valid()) return;
      std::lock_guard lock(mu_);
      if (stopped_) return;
      viewers_.push_back(std::move(viewer));
    }
  });
}

TelemetryServer::~TelemetryServer() { stop(); }

std::size_t TelemetryServer::viewer_count() const {
  std::lock_guard lock(mu_);
  return viewers_.size();
}

void TelemetryServer::broadcast(const TelemetryFrame& f) {
  const auto wire = encode_frame(f);
  std::lock_guard lock(mu_);
  std::erase_if(viewers_, [&](const Socket& v) {
    try {
      send_all(v, wire);
      return false;
    } catch (const SocketError&) {
      return true;
    }
  });
}

void TelemetryServer::stop() {
  {
    std::lock_guard lock(mu_);
    if (stopped_) return;
    stopped_ = true;
    for (auto& v : viewers_) v.shutdown();
    viewers_.clear();
  }
  listener_.shutdown();
  if (accept_thread_.joinable()) accept_thread_.join();
}

}  // namespace rolle::transport
