#pragma once

#include <filesystem>

#include "rolle/image.hpp"

namespace rolle {

// Lossless RGB8 PNG round trip. Both throw ImageError on I/O or codec failure.
void write_png(const std::filesystem::path& path, const ImageFrame& frame);
ImageFrame read_png(const std::filesystem::path& path);

}  // namespace rolle
