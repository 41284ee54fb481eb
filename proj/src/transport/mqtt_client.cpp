#include "rolle/transport/mqtt_client.hpp"

#include <spdlog/spdlog.h>

#include <array>
#include <atomic>
#include <condition_variable>
#include <map>
#include <mutex>
#include <thread>

#include "rolle/errors.hpp"
#include "rolle/transport/mqtt_codec.hpp"

namespace rolle::transport {

namespace mq = mqtt;

struct MqttClient::State {
  Socket socket;
  Options options;
  std::mutex write_mu;
  std::atomic<bool> alive{true};
  std::thread reader;
  mq::Decoder decoder;

  std::mutex mu;
  std::condition_variable cv;
  std::map<std::string, MessageHandler> handlers;
  std::map<std::uint16_t, bool> pending_subacks;  // id -> granted
  std::uint16_t next_packet_id = 1;

  void send(const mq::Packet& packet) {
    const auto wire = mq::encode(packet);
    std::lock_guard lock(write_mu);
    send_all(socket, wire);
  }

  void handle(mq::Packet& packet) {
    if (auto* p = std::get_if<mq::Publish>(&packet)) {
      MessageHandler handler;
      {
        std::lock_guard lock(mu);
        auto it = handlers.find(p->topic);
        if (it != handlers.end()) handler = it->second;
      }
      if (handler) handler(p->topic, p->payload);
    } else if (auto* s = std::get_if<mq::Suback>(&packet)) {
      std::lock_guard lock(mu);
      const bool granted =
          !s->return_codes.empty() && s->return_codes.front() != mq::kSubackFailure;
      pending_subacks[s->packet_id] = granted;
      cv.notify_all();
    } else if (std::holds_alternative<mq::Pingresp>(packet) ||
               std::holds_alternative<mq::Unsuback>(packet)) {
      // nothing to do
    } else {
      throw ProtocolError("unexpected packet from broker");
    }
  }

  void read_loop() {
    std::array<std::uint8_t, 16384> buf{};
    const auto ping_every = std::chrono::duration_cast<std::chrono::milliseconds>(options.keep_alive) / 2;
    auto last_ping = std::chrono::steady_clock::now();
    try {
      while (alive) {
        const auto wait = ping_every.count() > 0 ? ping_every : std::chrono::milliseconds(1000);
        if (wait_readable(socket, wait)) {
          const auto n = recv_some(socket, buf);
          if (n == 0) break;
          decoder.feed(std::span(buf.data(), n));
          while (auto packet = decoder.next()) handle(*packet);
        }
        const auto now = std::chrono::steady_clock::now();
        if (ping_every.count() > 0 && now - last_ping >= ping_every) {
          send(mq::Pingreq{});
          last_ping = now;
        }
      }
    } catch (const Error& e) {
      spdlog::debug("mqtt client '{}': {}", options.client_id, e.what());
    }
    alive = false;
    std::lock_guard lock(mu);
    cv.notify_all();
  }
};

MqttClient::MqttClient(std::unique_ptr<State> state) : state_(std::move(state)) {}
MqttClient::MqttClient(MqttClient&&) noexcept = default;
MqttClient& MqttClient::operator=(MqttClient&& other) noexcept {
  if (this != &other) {
    disconnect();
    state_ = std::move(other.state_);
  }
  return *this;
}
MqttClient::~MqttClient() { disconnect(); }

MqttClient MqttClient::connect(const Endpoint& broker, const Options& options) {
  auto state = std::make_unique<State>();
  state->options = options;
  state->socket = connect_tcp(broker);

  mq::Connect hello;
  hello.client_id = options.client_id;
  hello.keep_alive = static_cast<std::uint16_t>(options.keep_alive.count());
  state->send(hello);

  // CONNACK is read synchronously before the reader thread starts.
  std::array<std::uint8_t, 256> buf{};
  for (;;) {
    if (!wait_readable(state->socket, options.timeout))
      throw SocketError("timed out waiting for CONNACK from " + broker.to_string());
    const auto n = recv_some(state->socket, buf);
    if (n == 0) throw SocketError("broker closed the connection during CONNECT");
    state->decoder.feed(std::span(buf.data(), n));
    if (auto packet = state->decoder.next()) {
      auto* ack = std::get_if<mq::Connack>(&*packet);
      if (!ack) throw ProtocolError("expected CONNACK");
      if (ack->return_code != 0)
        throw ProtocolError("broker refused connection, code " + std::to_string(ack->return_code));
      break;
    }
  }
  auto* raw = state.get();
  state->reader = std::thread([raw] { raw->read_loop(); });
  return MqttClient(std::move(state));
}

void MqttClient::publish(std::string_view topic, std::string_view payload) {
  if (!connected()) throw SocketError("mqtt client is not connected");
  state_->send(mq::Publish{std::string(topic), std::string(payload), false, false});
}

void MqttClient::subscribe(const std::string& topic, MessageHandler handler) {
  if (!connected()) throw SocketError("mqtt client is not connected");
  std::uint16_t id = 0;
  {
    std::lock_guard lock(state_->mu);
    state_->handlers[topic] = std::move(handler);
    id = state_->next_packet_id++;
    if (state_->next_packet_id == 0) state_->next_packet_id = 1;
  }
  state_->send(mq::Subscribe{id, {{topic, 0}}});
  std::unique_lock lock(state_->mu);
  const bool done = state_->cv.wait_for(lock, state_->options.timeout, [&] {
    return state_->pending_subacks.count(id) > 0 || !state_->alive;
  });
  if (!done || !state_->alive) throw SocketError("no SUBACK for '" + topic + "'");
  const bool granted = state_->pending_subacks[id];
  state_->pending_subacks.erase(id);
  if (!granted) throw ProtocolError("broker refused subscription to '" + topic + "'");
}

bool MqttClient::connected() const { return state_ && state_->alive; }

void MqttClient::disconnect() {
  if (!state_) return;
  if (state_->alive.exchange(false)) {
    try {
      state_->send(mq::Disconnect{});
    } catch (const Error&) {
    }
  }
  state_->socket.shutdown();
  if (state_->reader.joinable()) state_->reader.join();
  state_.reset();
}

}  // namespace rolle::transport
