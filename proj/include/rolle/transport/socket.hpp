#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace rolle::transport {

// Owning POSIX socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release() {
    const int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void close();
  // Unblocks any thread sitting in recv/accept on this socket.
  void shutdown();

 private:
  int fd_ = -1;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  // "host:port" or ":port"; throws ConfigError.
  static Endpoint parse(const std::string& text);
  std::string to_string() const { return host + ":" + std::to_string(port); }
};

// Binds and listens. Port 0 picks an ephemeral port; see bound_port().
Socket listen_tcp(const Endpoint& at, int backlog = 16);
std::uint16_t bound_port(const Socket& s);
// Returns an invalid socket when the listener was shut down.
Socket accept_tcp(const Socket& listener);
Socket connect_tcp(const Endpoint& to);

// Both throw SocketError on failure.
void send_all(const Socket& s, std::span<const std::uint8_t> bytes);
// 0 means orderly EOF.
std::size_t recv_some(const Socket& s, std::span<std::uint8_t> buf);
// Waits for readability; false on timeout.
bool wait_readable(const Socket& s, std::chrono::milliseconds timeout);

}  // namespace rolle::transport
