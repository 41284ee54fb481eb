#pragma once

#include <string>
#include <string_view>

namespace rolle::transport {

inline constexpr std::string_view kSteeringTopic = "RolLE_MKII/steering";
inline constexpr std::string_view kThrottleTopic = "RolLE_MKII/throttle";

// Clamps to [-1, 1] and renders exactly four fraction digits, e.g. "-0.5000".
// Non-finite input encodes as "0.0000".
std::string encode_control(double value);

// Parses a decimal payload and clamps it into [-1, 1]. Throws PayloadError
// on anything that is not a finite number.
double decode_control(std::string_view payload);

}  // namespace rolle::transport
