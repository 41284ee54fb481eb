#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rolle/errors.hpp"
#include "rolle/transport/broker.hpp"
#include "rolle/transport/control_payload.hpp"
#include "rolle/transport/frame_stream.hpp"
#include "rolle/transport/mqtt_client.hpp"
#include "rolle/transport/mqtt_codec.hpp"

using namespace rolle;
using namespace rolle::transport;
using namespace std::chrono_literals;

namespace {

using Bytes = std::vector<std::uint8_t>;

Bytes bytes(std::initializer_list<int> v) {
  Bytes out;
  for (int b : v) out.push_back(static_cast<std::uint8_t>(b));
  return out;
}

mqtt::Packet roundtrip(const mqtt::Packet& p) {
  const Bytes wire = mqtt::encode(p);
  mqtt::Decoder d;
  d.feed(wire);
  auto out = d.next();
  EXPECT_TRUE(out.has_value());
  EXPECT_EQ(d.buffered(), 0u);
  return *out;
}

// Collects messages delivered on the client reader thread.
struct Inbox {
  std::mutex mu;
  std::condition_variable cv;
  std::vector<std::pair<std::string, std::string>> items;

  MessageHandler handler() {
    return [this](const std::string& t, const std::string& p) {
      std::lock_guard lock(mu);
      items.emplace_back(t, p);
      cv.notify_all();
    };
  }
  bool wait_for(std::size_t n, std::chrono::milliseconds timeout = 5s) {
    std::unique_lock lock(mu);
    return cv.wait_for(lock, timeout, [&] { return items.size() >= n; });
  }
  std::size_t size() {
    std::lock_guard lock(mu);
    return items.size();
  }
};

TelemetryFrame random_telemetry(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(0, 40), byte(0, 255);
  std::uniform_real_distribution<float> val(-1.0f, 1.0f);
  TelemetryFrame f;
  f.timestamp_ms = rng();
  f.steering = val(rng);
  f.throttle = val(rng);
  f.width = static_cast<std::uint32_t>(dim(rng));
  f.height = static_cast<std::uint32_t>(dim(rng));
  f.pixels.resize(std::size_t{f.width} * f.height * 3);
  for (auto& p : f.pixels) p = static_cast<std::uint8_t>(byte(rng));
  return f;
}

}  // namespace

TEST(ControlPayload, Examples) {
  EXPECT_EQ(encode_control(0.5), "0.5000");
  EXPECT_EQ(encode_control(-1.0), "-1.0000");
  EXPECT_EQ(encode_control(1.0), "1.0000");
  EXPECT_EQ(encode_control(-0.00001), "0.0000");
  EXPECT_EQ(encode_control(3.0), "1.0000");
  EXPECT_EQ(encode_control(NAN), "0.0000");
  EXPECT_DOUBLE_EQ(decode_control("0.5000"), 0.5);
  EXPECT_DOUBLE_EQ(decode_control("2.0000"), 1.0);
  EXPECT_DOUBLE_EQ(decode_control("-7"), -1.0);
  EXPECT_DOUBLE_EQ(decode_control("+0.25"), 0.25);
  for (const char* bad : {"", "abc", "0.5x", "nan", "inf", " 0.5", "1e400"})
    EXPECT_THROW(decode_control(bad), PayloadError) << bad;
}

TEST(ControlPayload, RoundTripToFourDecimals) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> v(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = v(rng);
    const std::string wire = encode_control(x);
    const double back = decode_control(wire);
    ASSERT_NEAR(back, x, 0.5e-4 + 1e-12);
    ASSERT_EQ(encode_control(back), wire);  // idempotent on its image
    ASSERT_EQ(wire.size() - wire.find('.'), 5u);
  }
}

TEST(MqttCodec, KnownWireBytes) {
  mqtt::Connect c;
  c.client_id = "a";
  c.keep_alive = 60;
  EXPECT_EQ(mqtt::encode(c), bytes({0x10, 0x0D, 0x00, 0x04, 'M', 'Q', 'T', 'T', 0x04, 0x02, 0x00, 0x3C,
                                    0x00, 0x01, 'a'}));
  EXPECT_EQ(mqtt::encode(mqtt::Publish{"t", "p", false, false}), bytes({0x30, 0x04, 0x00, 0x01, 't', 'p'}));
  EXPECT_EQ(mqtt::encode(mqtt::Pingreq{}), bytes({0xC0, 0x00}));
  EXPECT_EQ(mqtt::encode(mqtt::Pingresp{}), bytes({0xD0, 0x00}));
  EXPECT_EQ(mqtt::encode(mqtt::Disconnect{}), bytes({0xE0, 0x00}));
  EXPECT_EQ(mqtt::encode(mqtt::Connack{false, 0}), bytes({0x20, 0x02, 0x00, 0x00}));
  EXPECT_EQ(mqtt::encode(mqtt::Subscribe{1, {{"t", 0}}}), bytes({0x82, 0x06, 0x00, 0x01, 0x00, 0x01, 't', 0x00}));
  EXPECT_EQ(mqtt::encode(mqtt::Suback{1, {0}}), bytes({0x90, 0x03, 0x00, 0x01, 0x00}));
}

TEST(MqttCodec, RoundTripEveryPacketType) {
  mqtt::Connect c;
  c.client_id = "rover";
  c.keep_alive = 30;
  c.will_topic = "w";
  c.will_message = "bye";
  c.username = "u";
  c.password = "p";
  const std::vector<mqtt::Packet> packets = {
      c,
      mqtt::Connack{true, 0},
      mqtt::Publish{"RolLE_MKII/steering", "-0.5000", true, false},
      mqtt::Publish{"x", "", false, false},
      mqtt::Subscribe{7, {{"a", 0}, {"b/c", 0}}},
      mqtt::Suback{7, {0, mqtt::kSubackFailure}},
      mqtt::Unsubscribe{9, {"a"}},
      mqtt::Unsuback{9},
      mqtt::Pingreq{},
      mqtt::Pingresp{},
      mqtt::Disconnect{},
  };
  for (const auto& p : packets) EXPECT_EQ(roundtrip(p), p) << p.index();
}

TEST(MqttCodec, MultiByteRemainingLength) {
  const mqtt::Publish big{"t", std::string(300000, 'z'), false, false};
  const Bytes wire = mqtt::encode(big);
  // 300003 needs three length bytes.
  EXPECT_EQ(wire.size(), 1u + 3u + 300003u);
  EXPECT_EQ(roundtrip(big), mqtt::Packet(big));
}

TEST(MqttCodec, ByteAtATimeFeeding) {
  Bytes stream;
  for (int i = 0; i < 20; ++i) {
    const auto w = mqtt::encode(mqtt::Publish{"t", std::to_string(i), false, false});
    stream.insert(stream.end(), w.begin(), w.end());
  }
  mqtt::Decoder d;
  int got = 0;
  for (std::uint8_t b : stream) {
    d.feed(std::span(&b, 1));
    while (auto p = d.next()) {
      ASSERT_EQ(std::get<mqtt::Publish>(*p).payload, std::to_string(got));
      ++got;
    }
  }
  EXPECT_EQ(got, 20);
}

TEST(MqttCodec, RejectsQos1PublishAndBadHeaders) {
  mqtt::Decoder d;
  d.feed(bytes({0x32, 0x06, 0x00, 0x01, 't', 0x00, 0x01, 'p'}));
  EXPECT_THROW(d.next(), ProtocolError);
  EXPECT_THROW(d.next(), ProtocolError);  // poisoned

  mqtt::Decoder reserved;
  reserved.feed(bytes({0x00, 0x00}));
  EXPECT_THROW(reserved.next(), ProtocolError);

  mqtt::Decoder long_len;
  long_len.feed(bytes({0x30, 0xFF, 0xFF, 0xFF, 0xFF, 0x01}));
  EXPECT_THROW(long_len.next(), ProtocolError);

  mqtt::Decoder limit(16);
  limit.feed(mqtt::encode(mqtt::Publish{"t", std::string(64, 'a'), false, false}));
  EXPECT_THROW(limit.next(), ProtocolError);

  EXPECT_THROW(mqtt::decode_packet(0xC1, {}), ProtocolError);  // reserved flags on PINGREQ
  EXPECT_THROW(mqtt::encode(mqtt::Publish{std::string(70000, 't'), "", false, false}), ProtocolError);
}

TEST(MqttCodec, TopicNames) {
  EXPECT_TRUE(mqtt::valid_topic_name("RolLE_MKII/steering"));
  EXPECT_FALSE(mqtt::valid_topic_name(""));
  EXPECT_FALSE(mqtt::valid_topic_name("a/+/b"));
  EXPECT_FALSE(mqtt::valid_topic_name("a/#"));
  EXPECT_FALSE(mqtt::valid_topic_name(std::string("a\0b", 3)));
}

TEST(MqttCodec, FuzzNeverCrashes) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> len(0, 64), byte(0, 255);
  std::size_t errors = 0, packets = 0;
  for (int i = 0; i < 20000; ++i) {
    Bytes msg(static_cast<std::size_t>(len(rng)));
    for (auto& b : msg) b = static_cast<std::uint8_t>(byte(rng));
    mqtt::Decoder d(4096);
    try {
      d.feed(msg);
      while (d.next()) ++packets;
    } catch (const ProtocolError&) {
      ++errors;
    }
  }
  EXPECT_GT(errors, 0u);
}

TEST(FrameStream, TwoByTwoWireLayout) {
  TelemetryFrame f;
  f.timestamp_ms = 0x0102030405060708ull;
  f.steering = -0.5f;
  f.throttle = 0.25f;
  f.width = 2;
  f.height = 2;
  f.pixels = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  const Bytes wire = encode_frame(f);
  ASSERT_EQ(wire.size(), 40u);
  const Bytes expected = bytes({0, 0, 0, 36,                                      // payload length
                                1, 2, 3, 4, 5, 6, 7, 8,                           // timestamp
                                0xBF, 0x00, 0x00, 0x00,                           // -0.5f
                                0x3E, 0x80, 0x00, 0x00,                           // 0.25f
                                0, 0, 0, 2, 0, 0, 0, 2,                           // width, height
                                1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
  EXPECT_EQ(wire, expected);
  SpanSource src(wire);
  EXPECT_EQ(frame_stream_read(src), f);
  EXPECT_EQ(frame_stream_read(src), std::nullopt);
}

TEST(FrameStream, RandomFramesRoundTripInOrder) {
  std::mt19937_64 rng(4);
  std::vector<TelemetryFrame> frames;
  VectorSink sink;
  for (int i = 0; i < 200; ++i) {
    frames.push_back(random_telemetry(rng));
    frame_stream_write(sink, frames.back());
  }
  SpanSource src(sink.data);
  for (const auto& f : frames) {
    const auto got = frame_stream_read(src);
    ASSERT_TRUE(got);
    ASSERT_EQ(*got, f);
    ASSERT_EQ(encode_frame(*got), encode_frame(f));
  }
  EXPECT_FALSE(frame_stream_read(src));
}

TEST(FrameStream, IostreamAdapters) {
  std::mt19937_64 rng(8);
  const auto f = random_telemetry(rng);
  std::stringstream ss;
  OstreamSink out(ss);
  frame_stream_write(out, f);
  IstreamSource in(ss);
  EXPECT_EQ(frame_stream_read(in), f);
}

TEST(FrameStream, TruncationAndCorruption) {
  TelemetryFrame f;
  f.width = 3;
  f.height = 1;
  f.pixels.assign(9, 7);
  const Bytes wire = encode_frame(f);
  for (std::size_t cut : {1u, 4u, 10u, 30u}) {
    const Bytes partial(wire.begin(), wire.begin() + static_cast<std::ptrdiff_t>(cut));
    SpanSource src(partial);
    EXPECT_THROW(frame_stream_read(src), TruncatedStreamError) << cut;
  }
  Bytes bad = wire;
  bad[3] += 1;  // length prefix disagrees with width/height
  bad.push_back(0);
  SpanSource src(bad);
  EXPECT_THROW(frame_stream_read(src), StreamCorruptError);

  TelemetryFrame inconsistent = f;
  inconsistent.pixels.pop_back();
  VectorSink sink;
  EXPECT_THROW(frame_stream_write(sink, inconsistent), StreamCorruptError);
}

TEST(TelemetryServer, BroadcastsToViewer) {
  TelemetryServer server({"127.0.0.1", 0});
  Socket viewer = connect_tcp({"127.0.0.1", server.port()});
  for (int i = 0; i < 200 && server.viewer_count() == 0; ++i) std::this_thread::sleep_for(5ms);
  ASSERT_EQ(server.viewer_count(), 1u);
  std::mt19937_64 rng(2);
  std::vector<TelemetryFrame> sent;
  for (int i = 0; i < 5; ++i) {
    sent.push_back(random_telemetry(rng));
    server.broadcast(sent.back());
  }
  SocketSource src(viewer);
  for (const auto& f : sent) EXPECT_EQ(frame_stream_read(src), f);
  server.stop();
}

TEST(Broker, RoutesExactTopicAndPreservesOrder) {
  auto broker = Broker::serve({"127.0.0.1", 0});
  auto a = MqttClient::connect({"127.0.0.1", broker->port()}, {"a", 30s, 3000ms});
  auto b = MqttClient::connect({"127.0.0.1", broker->port()}, {"b", 30s, 3000ms});
  Inbox inbox;
  a.subscribe(std::string(kSteeringTopic), inbox.handler());
  b.publish(kThrottleTopic, "0.1000");  // no subscriber
  b.publish(kSteeringTopic, "-0.5000");
  b.publish(kSteeringTopic, "0.2500");
  ASSERT_TRUE(inbox.wait_for(2));
  std::this_thread::sleep_for(50ms);
  ASSERT_EQ(inbox.size(), 2u);
  EXPECT_EQ(inbox.items[0], (std::pair<std::string, std::string>{"RolLE_MKII/steering", "-0.5000"}));
  EXPECT_EQ(inbox.items[1].second, "0.2500");
  a.disconnect();
  b.disconnect();
  broker->stop();
  EXPECT_GE(broker->stats().messages_received, 3u);
}

TEST(Broker, ClosesSessionOnQos1Publish) {
  auto broker = Broker::serve({"127.0.0.1", 0});
  Socket s = connect_tcp({"127.0.0.1", broker->port()});
  mqtt::Connect c;
  c.client_id = "raw";
  send_all(s, mqtt::encode(c));
  std::uint8_t buf[64];
  ASSERT_TRUE(wait_readable(s, 2000ms));
  ASSERT_EQ(recv_some(s, buf), 4u);
  EXPECT_EQ(buf[0], 0x20);
  EXPECT_EQ(buf[3], 0x00);
  send_all(s, bytes({0x32, 0x06, 0x00, 0x01, 't', 0x00, 0x01, 'p'}));
  ASSERT_TRUE(wait_readable(s, 2000ms));
  EXPECT_EQ(recv_some(s, buf), 0u);
  for (int i = 0; i < 200 && broker->stats().protocol_errors == 0; ++i) std::this_thread::sleep_for(5ms);
  EXPECT_EQ(broker->stats().protocol_errors, 1u);
}

TEST(Broker, AnswersPing) {
  auto broker = Broker::serve({"127.0.0.1", 0});
  Socket s = connect_tcp({"127.0.0.1", broker->port()});
  mqtt::Connect c;
  c.client_id = "ping";
  send_all(s, mqtt::encode(c));
  std::uint8_t buf[16];
  ASSERT_TRUE(wait_readable(s, 2000ms));
  ASSERT_EQ(recv_some(s, buf), 4u);
  send_all(s, mqtt::encode(mqtt::Pingreq{}));
  ASSERT_TRUE(wait_readable(s, 2000ms));
  ASSERT_EQ(recv_some(s, buf), 2u);
  EXPECT_EQ(buf[0], 0xD0);
}

TEST(MqttClient, UnreachableBroker) {
  auto broker = Broker::serve({"127.0.0.1", 0});
  const auto port = broker->port();
  broker->stop();
  broker.reset();
  EXPECT_THROW(MqttClient::connect({"127.0.0.1", port}), SocketError);
}

TEST(Endpoint, Parse) {
  const auto e = Endpoint::parse("10.0.0.2:1883");
  EXPECT_EQ(e.host, "10.0.0.2");
  EXPECT_EQ(e.port, 1883);
  EXPECT_EQ(Endpoint::parse(":5005").port, 5005);
  EXPECT_THROW(Endpoint::parse("nohost"), ConfigError);
  EXPECT_THROW(Endpoint::parse("h:99999"), ConfigError);
}
