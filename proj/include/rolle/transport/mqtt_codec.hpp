#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

// MQTT 3.1.1 framing for the QoS-0 subset the rover uses: CONNECT/CONNACK,
// PUBLISH, SUBSCRIBE/SUBACK, UNSUBSCRIBE/UNSUBACK, PINGREQ/PINGRESP and
// DISCONNECT. QoS 1/2 publishes are protocol errors.
namespace rolle::transport::mqtt {

enum class PacketType : std::uint8_t {
  connect = 1,
  connack = 2,
  publish = 3,
  puback = 4,
  pubrec = 5,
  pubrel = 6,
  pubcomp = 7,
  subscribe = 8,
  suback = 9,
  unsubscribe = 10,
  unsuback = 11,
  pingreq = 12,
  pingresp = 13,
  disconnect = 14,
};

inline constexpr std::uint8_t kProtocolLevel = 4;
inline constexpr std::uint8_t kSubackFailure = 0x80;

struct Connect {
  std::string client_id;
  std::uint16_t keep_alive = 0;
  bool clean_session = true;
  std::uint8_t protocol_level = kProtocolLevel;
  std::optional<std::string> will_topic;
  std::optional<std::string> will_message;
  std::optional<std::string> username;
  std::optional<std::string> password;
  friend bool operator==(const Connect&, const Connect&) = default;
};

struct Connack {
  bool session_present = false;
  std::uint8_t return_code = 0;
  friend bool operator==(const Connack&, const Connack&) = default;
};

struct Publish {
  std::string topic;
  std::string payload;
  bool retain = false;
  bool dup = false;
  friend bool operator==(const Publish&, const Publish&) = default;
};

struct Subscribe {
  std::uint16_t packet_id = 0;
  std::vector<std::pair<std::string, std::uint8_t>> filters;
  friend bool operator==(const Subscribe&, const Subscribe&) = default;
};

struct Suback {
  std::uint16_t packet_id = 0;
  std::vector<std::uint8_t> return_codes;
  friend bool operator==(const Suback&, const Suback&) = default;
};

struct Unsubscribe {
  std::uint16_t packet_id = 0;
  std::vector<std::string> filters;
  friend bool operator==(const Unsubscribe&, const Unsubscribe&) = default;
};

struct Unsuback {
  std::uint16_t packet_id = 0;
  friend bool operator==(const Unsuback&, const Unsuback&) = default;
};

struct Pingreq {
  friend bool operator==(const Pingreq&, const Pingreq&) = default;
};
struct Pingresp {
  friend bool operator==(const Pingresp&, const Pingresp&) = default;
};
struct Disconnect {
  friend bool operator==(const Disconnect&, const Disconnect&) = default;
};

using Packet = std::variant<Connect, Connack, Publish, Subscribe, Suback, Unsubscribe, Unsuback,
                            Pingreq, Pingresp, Disconnect>;

std::vector<std::uint8_t> encode(const Packet& packet);

// Decodes one complete packet body. Throws ProtocolError.
Packet decode_packet(std::uint8_t first_byte, std::span<const std::uint8_t> body);

// Incremental decoder over a byte stream. Any malformed input raises
// ProtocolError; after that the decoder is poisoned and keeps throwing.
class Decoder {
 public:
  explicit Decoder(std::size_t max_packet_size = 1 << 20) : max_packet_size_(max_packet_size) {}

  void feed(std::span<const std::uint8_t> bytes);
  std::optional<Packet> next();
  std::size_t buffered() const { return buffer_.size() - read_pos_; }

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t read_pos_ = 0;
  std::size_t max_packet_size_;
  bool failed_ = false;
};

// True when the topic name is usable for an exact-match subscription.
bool valid_topic_name(std::string_view topic);

}  // namespace rolle::transport::mqtt
