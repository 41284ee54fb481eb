#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rolle {

struct Rgb8 {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

// Interleaved 3-channel 8-bit image, row-major. The channels are RGB for
// camera frames and Y,U,V after colour conversion.
struct ImageFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
  std::uint64_t timestamp_ms = 0;

  ImageFrame() = default;
  ImageFrame(int w, int h, std::uint64_t ts = 0);
  ImageFrame(int w, int h, Rgb8 fill, std::uint64_t ts = 0);

  std::size_t index(int row, int col) const {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
            static_cast<std::size_t>(col)) *
           3;
  }
  Rgb8 at(int row, int col) const {
    const auto i = index(row, col);
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
  void set(int row, int col, Rgb8 c) {
    const auto i = index(row, col);
    pixels[i] = c.r;
    pixels[i + 1] = c.g;
    pixels[i + 2] = c.b;
  }

  // Throws ImageError when the buffer length disagrees with the dimensions.
  void validate() const;

  friend bool operator==(const ImageFrame&, const ImageFrame&) = default;
};

}  // namespace rolle
