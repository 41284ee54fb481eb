#pragma once

#include <filesystem>

#include "rolle/learning/model.hpp"

namespace rolle::learning {

inline constexpr std::uint16_t kModelFormatVersion = 1;

// "RLLE", u16 version, spec descriptor as u32 values, then every parameter
// tensor as little-endian f32 in layer order (weights, then bias).
void save_model(const Model<float>& m, const std::filesystem::path& path);

// Throws LoadError when the file cannot be opened, IncompatibleModelError on
// bad magic or version and CorruptModelError on truncation or a bad spec.
Model<float> load_model(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize_model(const Model<float>& m);
Model<float> deserialize_model(std::span<const std::uint8_t> bytes);

}  // namespace rolle::learning
