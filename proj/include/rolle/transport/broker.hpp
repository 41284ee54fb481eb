#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "rolle/transport/socket.hpp"

namespace rolle::transport {

// QoS-0 MQTT 3.1.1 subset broker: exact-name subscriptions, no retained
// messages, no persistent sessions. Each session runs on its own thread and
// a publisher's messages are forwarded synchronously in arrival order, which
// preserves per-publisher per-topic ordering.
class Broker {
 public:
  struct Stats {
    std::uint64_t sessions_accepted = 0;
    std::uint64_t messages_received = 0;
    std::uint64_t messages_delivered = 0;
    std::uint64_t protocol_errors = 0;
  };

  // Binds immediately; port 0 picks an ephemeral port.
  static std::unique_ptr<Broker> serve(const Endpoint& listen_at);
  ~Broker();
  Broker(const Broker&) = delete;
  Broker& operator=(const Broker&) = delete;

  std::uint16_t port() const { return port_; }
  Stats stats() const;
  void stop();

 private:
  struct Session;
  explicit Broker(Socket listener);
  void accept_loop();
  void session_loop(const std::shared_ptr<Session>& session);
  void route(const std::string& topic, const std::vector<std::uint8_t>& wire);
  void drop_subscriptions(const std::shared_ptr<Session>& session);
  void reap_finished();

  Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;

  mutable std::mutex sessions_mu_;
  std::vector<std::shared_ptr<Session>> sessions_;

  std::mutex subs_mu_;
  std::unordered_map<std::string, std::vector<std::shared_ptr<Session>>> subscriptions_;

  std::atomic<std::uint64_t> sessions_accepted_{0};
  std::atomic<std::uint64_t> messages_received_{0};
  std::atomic<std::uint64_t> messages_delivered_{0};
  std::atomic<std::uint64_t> protocol_errors_{0};
};

}  // namespace rolle::transport
