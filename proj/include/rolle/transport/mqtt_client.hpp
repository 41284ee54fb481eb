#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "rolle/transport/socket.hpp"

namespace rolle::transport {

// Anything that can push a payload onto a named topic. publish() throws
// SocketError when the message could not be handed to the transport.
class MessagePublisher {
 public:
  virtual ~MessagePublisher() = default;
  virtual void publish(std::string_view topic, std::string_view payload) = 0;
};

using MessageHandler = std::function<void(const std::string& topic, const std::string& payload)>;

// Minimal QoS-0 MQTT client. A background reader thread dispatches incoming
// PUBLISH packets to the registered handlers and keeps the session alive with
// PINGREQ. The handle is movable; one connection must not be driven from two
// threads without external serialization.
class MqttClient final : public MessagePublisher {
 public:
  struct Options {
    std::string client_id = "rolle";
    std::chrono::seconds keep_alive{30};
    std::chrono::milliseconds timeout{3000};
  };

  // Throws SocketError / ProtocolError when the broker is unreachable or
  // refuses the session.
  static MqttClient connect(const Endpoint& broker, const Options& options);
  static MqttClient connect(const Endpoint& broker) { return connect(broker, Options{}); }

  MqttClient(MqttClient&&) noexcept;
  MqttClient& operator=(MqttClient&&) noexcept;
  ~MqttClient() override;

  void publish(std::string_view topic, std::string_view payload) override;
  // Blocks until SUBACK. The handler runs on the reader thread.
  void subscribe(const std::string& topic, MessageHandler handler);
  bool connected() const;
  void disconnect();

 private:
  struct State;
  explicit MqttClient(std::unique_ptr<State> state);
  std::unique_ptr<State> state_;
};

}  // namespace rolle::transport
