#include "rolle/transport/mqtt_codec.hpp"

#include <string_view>

#include "rolle/errors.hpp"

namespace rolle::transport::mqtt {
namespace {

constexpr std::uint32_t kMaxRemainingLength = 268'435'455;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v & 0xFF));
  }
  void str(std::string_view s) {
    if (s.size() > 0xFFFF) throw ProtocolError("string field longer than 65535 bytes");
    u16(static_cast<std::uint16_t>(s.size()));
    raw(s);
  }
  void raw(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

std::vector<std::uint8_t> frame(std::uint8_t first, const std::vector<std::uint8_t>& body) {
  if (body.size() > kMaxRemainingLength) throw ProtocolError("packet too large");
  std::vector<std::uint8_t> out;
  out.reserve(body.size() + 5);
  out.push_back(first);
  auto len = static_cast<std::uint32_t>(body.size());
  do {
    std::uint8_t digit = len % 128;
    len /= 128;
    if (len > 0) digit |= 0x80;
    out.push_back(digit);
  } while (len > 0);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> body) : body_(body) {}
  std::uint8_t u8() {
    need(1);
    return body_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>((body_[pos_] << 8) | body_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::string str() {
    const auto n = u16();
    need(n);
    std::string s(reinterpret_cast<const char*>(body_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::string rest() {
    std::string s(reinterpret_cast<const char*>(body_.data() + pos_), body_.size() - pos_);
    pos_ = body_.size();
    return s;
  }
  bool done() const { return pos_ == body_.size(); }

 private:
  void need(std::size_t n) const {
    if (body_.size() - pos_ < n) throw ProtocolError("packet body shorter than its fields");
  }
  std::span<const std::uint8_t> body_;
  std::size_t pos_ = 0;
};

void expect_flags(std::uint8_t first, std::uint8_t flags, const char* name) {
  if ((first & 0x0F) != flags) throw ProtocolError(std::string("reserved flags set on ") + name);
}

void expect_empty(std::span<const std::uint8_t> body, const char* name) {
  if (!body.empty()) throw ProtocolError(std::string(name) + " must have an empty body");
}

struct Encoder {
  std::vector<std::uint8_t> operator()(const Connect& p) const {
    Writer w;
    w.str("MQTT");
    w.u8(p.protocol_level);
    std::uint8_t flags = 0;
    if (p.clean_session) flags |= 0x02;
    if (p.will_topic) flags |= 0x04;
    if (p.password) flags |= 0x40;
    if (p.username) flags |= 0x80;
    w.u8(flags);
    w.u16(p.keep_alive);
    w.str(p.client_id);
    if (p.will_topic) {
      w.str(*p.will_topic);
      w.str(p.will_message.value_or(""));
    }
    if (p.username) w.str(*p.username);
    if (p.password) w.str(*p.password);
    return frame(0x10, w.bytes());
  }
  std::vector<std::uint8_t> operator()(const Connack& p) const {
    return frame(0x20, {static_cast<std::uint8_t>(p.session_present ? 1 : 0), p.return_code});
  }
  std::vector<std::uint8_t> operator()(const Publish& p) const {
    Writer w;
    w.str(p.topic);
    w.raw(p.payload);
    const std::uint8_t first = 0x30 | (p.dup ? 0x08 : 0) | (p.retain ? 0x01 : 0);
    return frame(first, w.bytes());
  }
  std::vector<std::uint8_t> operator()(const Subscribe& p) const {
    Writer w;
    w.u16(p.packet_id);
    for (const auto& [topic, qos] : p.filters) {
      w.str(topic);
      w.u8(qos);
    }
    return frame(0x82, w.bytes());
  }
  std::vector<std::uint8_t> operator()(const Suback& p) const {
    Writer w;
    w.u16(p.packet_id);
    for (auto rc : p.return_codes) w.u8(rc);
    return frame(0x90, w.bytes());
  }
  std::vector<std::uint8_t> operator()(const Unsubscribe& p) const {
    Writer w;
    w.u16(p.packet_id);
    for (const auto& topic : p.filters) w.str(topic);
    return frame(0xA2, w.bytes());
  }
  std::vector<std::uint8_t> operator()(const Unsuback& p) const {
    Writer w;
    w.u16(p.packet_id);
    return frame(0xB0, w.bytes());
  }
  std::vector<std::uint8_t> operator()(const Pingreq&) const { return frame(0xC0, {}); }
  std::vector<std::uint8_t> operator()(const Pingresp&) const { return frame(0xD0, {}); }
  std::vector<std::uint8_t> operator()(const Disconnect&) const { return frame(0xE0, {}); }
};

Connect decode_connect(Reader& r) {
  if (r.str() != "MQTT") throw ProtocolError("unsupported protocol name");
  Connect c;
  c.protocol_level = r.u8();
  const auto flags = r.u8();
  if (flags & 0x01) throw ProtocolError("reserved CONNECT flag set");
  c.clean_session = (flags & 0x02) != 0;
  const bool will = (flags & 0x04) != 0;
  const auto will_qos = (flags >> 3) & 0x03;
  if (!will && (will_qos != 0 || (flags & 0x20))) throw ProtocolError("will flags without will");
  if (will_qos == 3) throw ProtocolError("invalid will QoS");
  const bool password = (flags & 0x40) != 0;
  const bool username = (flags & 0x80) != 0;
  if (password && !username) throw ProtocolError("password without username");
  c.keep_alive = r.u16();
  c.client_id = r.str();
  if (will) {
    c.will_topic = r.str();
    c.will_message = r.str();
  }
  if (username) c.username = r.str();
  if (password) c.password = r.str();
  if (!r.done()) throw ProtocolError("trailing bytes in CONNECT");
  return c;
}

}  // namespace

bool valid_topic_name(std::string_view topic) {
  if (topic.empty() || topic.size() > 0xFFFF) return false;
  for (char ch : topic)
    if (ch == '+' || ch == '#' || ch == '\0') return false;
  return true;
}

std::vector<std::uint8_t> encode(const Packet& packet) { return std::visit(Encoder{}, packet); }

Packet decode_packet(std::uint8_t first_byte, std::span<const std::uint8_t> body) {
  const auto type = static_cast<PacketType>(first_byte >> 4);
  Reader r(body);
  switch (type) {
    case PacketType::connect:
      expect_flags(first_byte, 0, "CONNECT");
      return decode_connect(r);
    case PacketType::connack: {
      expect_flags(first_byte, 0, "CONNACK");
      Connack c;
      const auto ack = r.u8();
      if (ack & 0xFE) throw ProtocolError("reserved CONNACK flag set");
      c.session_present = ack & 1;
      c.return_code = r.u8();
      if (!r.done()) throw ProtocolError("trailing bytes in CONNACK");
      return c;
    }
    case PacketType::publish: {
      const auto qos = (first_byte >> 1) & 0x03;
      if (qos != 0) throw ProtocolError("QoS " + std::to_string(qos) + " PUBLISH is not supported");
      Publish p;
      p.dup = (first_byte & 0x08) != 0;
      if (p.dup) throw ProtocolError("DUP flag set on a QoS 0 PUBLISH");
      p.retain = (first_byte & 0x01) != 0;
      p.topic = r.str();
      if (!valid_topic_name(p.topic)) throw ProtocolError("invalid PUBLISH topic name");
      p.payload = r.rest();
      return p;
    }
    case PacketType::subscribe: {
      expect_flags(first_byte, 0x02, "SUBSCRIBE");
      Subscribe s;
      s.packet_id = r.u16();
      while (!r.done()) {
        auto topic = r.str();
        const auto qos = r.u8();
        if (qos & 0xFC) throw ProtocolError("reserved SUBSCRIBE option bits set");
        if (topic.empty()) throw ProtocolError("empty SUBSCRIBE topic filter");
        s.filters.emplace_back(std::move(topic), qos);
      }
      if (s.filters.empty()) throw ProtocolError("SUBSCRIBE without filters");
      return s;
    }
    case PacketType::suback: {
      expect_flags(first_byte, 0, "SUBACK");
      Suback s;
      s.packet_id = r.u16();
      while (!r.done()) s.return_codes.push_back(r.u8());
      return s;
    }
    case PacketType::unsubscribe: {
      expect_flags(first_byte, 0x02, "UNSUBSCRIBE");
      Unsubscribe u;
      u.packet_id = r.u16();
      while (!r.done()) u.filters.push_back(r.str());
      if (u.filters.empty()) throw ProtocolError("UNSUBSCRIBE without filters");
      return u;
    }
    case PacketType::unsuback: {
      expect_flags(first_byte, 0, "UNSUBACK");
      Unsuback u;
      u.packet_id = r.u16();
      if (!r.done()) throw ProtocolError("trailing bytes in UNSUBACK");
      return u;
    }
    case PacketType::pingreq:
      expect_flags(first_byte, 0, "PINGREQ");
      expect_empty(body, "PINGREQ");
      return Pingreq{};
    case PacketType::pingresp:
      expect_flags(first_byte, 0, "PINGRESP");
      expect_empty(body, "PINGRESP");
      return Pingresp{};
    case PacketType::disconnect:
      expect_flags(first_byte, 0, "DISCONNECT");
      expect_empty(body, "DISCONNECT");
      return Disconnect{};
    case PacketType::puback:
    case PacketType::pubrec:
    case PacketType::pubrel:
    case PacketType::pubcomp:
      throw ProtocolError("QoS 1/2 acknowledgement packets are not supported");
  }
  throw ProtocolError("unknown packet type " + std::to_string(first_byte >> 4));
}

void Decoder::feed(std::span<const std::uint8_t> bytes) {
  if (read_pos_ > 0 && (read_pos_ == buffer_.size() || read_pos_ > 65536)) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(read_pos_));
    read_pos_ = 0;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Packet> Decoder::next() {
  if (failed_) throw ProtocolError("decoder is in a failed state");
  const std::size_t avail = buffer_.size() - read_pos_;
  if (avail < 2) return std::nullopt;
  const std::uint8_t* base = buffer_.data() + read_pos_;
  const std::uint8_t first = base[0];
  const auto type = first >> 4;
  if (type == 0 || type == 15) {
    failed_ = true;
    throw ProtocolError("reserved packet type " + std::to_string(type));
  }

  std::uint32_t length = 0;
  std::uint32_t multiplier = 1;
  std::size_t header = 1;
  for (;;) {
    if (header > 4) {
      failed_ = true;
      throw ProtocolError("remaining length uses more than 4 bytes");
    }
    if (header >= avail) return std::nullopt;
    const std::uint8_t digit = base[header++];
    length += (digit & 0x7F) * multiplier;
    if (!(digit & 0x80)) break;
    multiplier *= 128;
  }
  if (length > max_packet_size_) {
    failed_ = true;
    throw ProtocolError("packet of " + std::to_string(length) + " bytes exceeds limit");
  }
  if (avail - header < length) return std::nullopt;

  std::span<const std::uint8_t> body(base + header, length);
  read_pos_ += header + length;
  try {
    auto packet = decode_packet(first, body);
    if (read_pos_ == buffer_.size()) {
      buffer_.clear();
      read_pos_ = 0;
    }
    return packet;
  } catch (...) {
    failed_ = true;
    throw;
  }
}

}  // namespace rolle::transport::mqtt
