#include "rolle/image.hpp"

#include <string>

#include "rolle/errors.hpp"

namespace rolle {

ImageFrame::ImageFrame(int w, int h, std::uint64_t ts)
    : width(w), height(h), timestamp_ms(ts) {
  if (w < 0 || h < 0) throw ImageError("negative image dimensions");
  pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0);
}

ImageFrame::ImageFrame(int w, int h, Rgb8 fill, std::uint64_t ts) : ImageFrame(w, h, ts) {
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill.r;
    pixels[i + 1] = fill.g;
    pixels[i + 2] = fill.b;
  }
}

void ImageFrame::validate() const {
  if (width <= 0 || height <= 0)
    throw ImageError("image has non-positive dimensions " + std::to_string(width) + "x" +
                     std::to_string(height));
  const auto expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
  if (pixels.size() != expected)
    throw ImageError("pixel buffer holds " + std::to_string(pixels.size()) + " bytes, expected " +
                     std::to_string(expected));
}

}  // namespace rolle
