#include "rolle/transport/control_payload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "rolle/errors.hpp"

namespace rolle::transport {

std::string encode_control(double value) {
  if (!std::isfinite(value)) value = 0.0;
  value = std::clamp(value, -1.0, 1.0);
  const long long ticks = std::llround(value * 10000.0);
  const long long mag = ticks < 0 ? -ticks : ticks;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s%lld.%04lld", ticks < 0 ? "-" : "", mag / 10000, mag % 10000);
  return buf;
}

double decode_control(std::string_view payload) {
  if (payload.empty()) throw PayloadError("empty control payload");
  const char* first = payload.data();
  const char* last = first + payload.size();
  if (*first == '+') ++first;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::fixed);
  if (ec != std::errc() || ptr != last || !std::isfinite(value))
    throw PayloadError("control payload is not a number: '" + std::string(payload) + "'");
  return std::clamp(value, -1.0, 1.0);
}

}  // namespace rolle::transport
