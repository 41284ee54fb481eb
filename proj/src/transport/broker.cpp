#include "rolle/transport/broker.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>

#include "rolle/errors.hpp"
#include "rolle/transport/mqtt_codec.hpp"

namespace rolle::transport {

namespace mq = mqtt;

struct Broker::Session {
  Socket socket;
  std::mutex write_mu;
  std::thread thread;
  std::atomic<bool> finished{false};
  std::string client_id;

  void send(std::span<const std::uint8_t> bytes) {
    std::lock_guard lock(write_mu);
    send_all(socket, bytes);
  }
};

std::unique_ptr<Broker> Broker::serve(const Endpoint& listen_at) {
  std::unique_ptr<Broker> broker(new Broker(listen_tcp(listen_at)));
  broker->accept_thread_ = std::thread([b = broker.get()] { b->accept_loop(); });
  return broker;
}

Broker::Broker(Socket listener) : listener_(std::move(listener)), port_(bound_port(listener_)) {}

Broker::~Broker() { stop(); }

Broker::Stats Broker::stats() const {
  return {sessions_accepted_.load(), messages_received_.load(), messages_delivered_.load(),
          protocol_errors_.load()};
}

void Broker::stop() {
  if (stopping_.exchange(true)) return;
  listener_.shutdown();
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::shared_ptr<Session>> sessions;
  {
    std::lock_guard lock(sessions_mu_);
    sessions.swap(sessions_);
  }
  for (auto& s : sessions) s->socket.shutdown();
  for (auto& s : sessions)
    if (s->thread.joinable()) s->thread.join();
  std::lock_guard lock(subs_mu_);
  subscriptions_.clear();
}

void Broker::accept_loop() {
  while (!stopping_) {
    Socket conn = accept_tcp(listener_);
    if (!conn.valid()) break;
    if (stopping_) break;
    auto session = std::make_shared<Session>();
    session->socket = std::move(conn);
    ++sessions_accepted_;
    reap_finished();
    std::lock_guard lock(sessions_mu_);
    session->thread = std::thread([this, session] { session_loop(session); });
    sessions_.push_back(session);
  }
}

void Broker::reap_finished() {
  std::vector<std::shared_ptr<Session>> done;
  {
    std::lock_guard lock(sessions_mu_);
    auto it = std::partition(sessions_.begin(), sessions_.end(),
                             [](const auto& s) { return !s->finished.load(); });
    done.assign(it, sessions_.end());
    sessions_.erase(it, sessions_.end());
  }
  for (auto& s : done)
    if (s->thread.joinable()) s->thread.join();
}

void Broker::route(const std::string& topic, const std::vector<std::uint8_t>& wire) {
  std::vector<std::shared_ptr<Session>> targets;
  {
    std::lock_guard lock(subs_mu_);
    auto it = subscriptions_.find(topic);
    if (it == subscriptions_.end()) return;
    targets = it->second;
  }
  for (auto& target : targets) {
    try {
      target->send(wire);
      ++messages_delivered_;
    } catch (const SocketError&) {
      target->socket.shutdown();
    }
  }
}

void Broker::drop_subscriptions(const std::shared_ptr<Session>& session) {
  std::lock_guard lock(subs_mu_);
  for (auto it = subscriptions_.begin(); it != subscriptions_.end();) {
    auto& subs = it->second;
    subs.erase(std::remove(subs.begin(), subs.end(), session), subs.end());
    it = subs.empty() ? subscriptions_.erase(it) : std::next(it);
  }
}

void Broker::session_loop(const std::shared_ptr<Session>& session) {
  using namespace std::chrono_literals;
  mq::Decoder decoder;
  bool connected = false;
  std::chrono::milliseconds idle_limit = 10s;  // until CONNECT arrives
  std::array<std::uint8_t, 16384> buf{};

  try {
    for (bool open = true; open && !stopping_;) {
      if (!wait_readable(session->socket, idle_limit)) {
        spdlog::debug("broker: session '{}' idle timeout", session->client_id);
        break;
      }
      const auto n = recv_some(session->socket, buf);
      if (n == 0) break;
      decoder.feed(std::span(buf.data(), n));
      while (open) {
        auto packet = decoder.next();
        if (!packet) break;
        if (!connected && !std::holds_alternative<mq::Connect>(*packet))
          throw ProtocolError("first packet must be CONNECT");

        if (auto* c = std::get_if<mq::Connect>(&*packet)) {
          if (connected) throw ProtocolError("second CONNECT on one session");
          if (c->protocol_level != mq::kProtocolLevel) {
            session->send(mq::encode(mq::Connack{false, 1}));
            open = false;
            break;
          }
          session->client_id = c->client_id;
          connected = true;
          // Keep-alive grace of one and a half periods.
          idle_limit = c->keep_alive == 0 ? std::chrono::milliseconds(24h)
                                          : std::chrono::milliseconds(c->keep_alive * 1500);
          session->send(mq::encode(mq::Connack{false, 0}));
        } else if (auto* p = std::get_if<mq::Publish>(&*packet)) {
          ++messages_received_;
          p->retain = false;
          route(p->topic, mq::encode(*p));
        } else if (auto* s = std::get_if<mq::Subscribe>(&*packet)) {
          mq::Suback ack{s->packet_id, {}};
          {
            std::lock_guard lock(subs_mu_);
            for (const auto& [filter, qos] : s->filters) {
              (void)qos;
              // Wildcard filters are refused; everything is granted at QoS 0.
              if (!mq::valid_topic_name(filter)) {
                ack.return_codes.push_back(mq::kSubackFailure);
                continue;
              }
              auto& subs = subscriptions_[filter];
              if (std::find(subs.begin(), subs.end(), session) == subs.end()) subs.push_back(session);
              ack.return_codes.push_back(0);
            }
          }
          session->send(mq::encode(ack));
        } else if (auto* u = std::get_if<mq::Unsubscribe>(&*packet)) {
          {
            std::lock_guard lock(subs_mu_);
            for (const auto& filter : u->filters) {
              auto it = subscriptions_.find(filter);
              if (it == subscriptions_.end()) continue;
              auto& subs = it->second;
              subs.erase(std::remove(subs.begin(), subs.end(), session), subs.end());
              if (subs.empty()) subscriptions_.erase(it);
            }
          }
          session->send(mq::encode(mq::Unsuback{u->packet_id}));
        } else if (std::holds_alternative<mq::Pingreq>(*packet)) {
          session->send(mq::encode(mq::Pingresp{}));
        } else if (std::holds_alternative<mq::Disconnect>(*packet)) {
          open = false;
        } else {
          throw ProtocolError("client sent a server-only packet");
        }
      }
    }
  } catch (const ProtocolError& e) {
    ++protocol_errors_;
    spdlog::warn("broker: closing session '{}': {}", session->client_id, e.what());
  } catch (const SocketError& e) {
    spdlog::debug("broker: session '{}' socket error: {}", session->client_id, e.what());
  }
  drop_subscriptions(session);
  session->socket.shutdown();
  session->finished = true;
}

}  // namespace rolle::transport
