#include "rolle/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdlib>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "rolle/errors.hpp"

namespace rolle {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors by longjmp; the message is parked here until the
// handler returns to C++ land.
struct PngErrorSlot {
  std::jmp_buf jump;
  char message[256] = {};
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* slot = static_cast<PngErrorSlot*>(png_get_error_ptr(png));
  std::snprintf(slot->message, sizeof(slot->message), "%s", msg);
  std::longjmp(slot->jump, 1);
}
void on_png_warning(png_structp, png_const_charp) {}

// No C++ object with a destructor may be created between setjmp and the
// end of these helpers.
bool encode_rows(std::FILE* file, const ImageFrame& frame, png_bytep* rows, PngErrorSlot& slot) {
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &slot, on_png_error, on_png_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(slot.jump)) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, file);
  // Synthetic frames are mostly flat colour; the fast level compresses them well.
  png_set_compression_level(png, 1);
  png_set_IHDR(png, info, static_cast<png_uint_32>(frame.width),
               static_cast<png_uint_32>(frame.height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_rows(png, info, rows);
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

struct DecodedHeader {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
};

// Two-phase decode: the first call reads the header, the second fills rows.
bool decode_png(std::FILE* file, PngErrorSlot& slot, DecodedHeader& header,
                std::vector<std::uint8_t>& pixels) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &slot, on_png_error, on_png_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  png_bytep* rows = nullptr;
  if (setjmp(slot.jump)) {
    std::free(rows);
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, file);
  png_read_info(png, info);
  header.width = png_get_image_width(png, info);
  header.height = png_get_image_height(png, info);
  const auto color = png_get_color_type(png, info);
  const auto depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  if (png_get_rowbytes(png, info) != static_cast<std::size_t>(header.width) * 3) {
    std::snprintf(slot.message, sizeof(slot.message), "unsupported PNG layout");
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  pixels.resize(static_cast<std::size_t>(header.width) * header.height * 3);
  rows = static_cast<png_bytep*>(std::malloc(sizeof(png_bytep) * header.height));
  for (png_uint_32 r = 0; r < header.height; ++r)
    rows[r] = pixels.data() + static_cast<std::size_t>(r) * header.width * 3;
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  std::free(rows);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

}  // namespace

void write_png(const std::filesystem::path& path, const ImageFrame& frame) {
  frame.validate();
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw ImageError("cannot open " + path.string() + " for writing");
  std::vector<png_bytep> rows(static_cast<std::size_t>(frame.height));
  const auto stride = static_cast<std::size_t>(frame.width) * 3;
  for (int r = 0; r < frame.height; ++r)
    rows[static_cast<std::size_t>(r)] =
        const_cast<png_bytep>(frame.pixels.data() + static_cast<std::size_t>(r) * stride);
  PngErrorSlot slot;
  if (!encode_rows(file.get(), frame, rows.data(), slot))
    throw ImageError("png encode failed for " + path.string() + ": " + slot.message);
  if (std::fflush(file.get()) != 0 || std::ferror(file.get()))
    throw ImageError("short write on " + path.string());
}

ImageFrame read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw ImageError("cannot open " + path.string());
  PngErrorSlot slot;
  DecodedHeader header;
  ImageFrame frame;
  if (!decode_png(file.get(), slot, header, frame.pixels))
    throw ImageError("png decode failed for " + path.string() + ": " + slot.message);
  frame.width = static_cast<int>(header.width);
  frame.height = static_cast<int>(header.height);
  return frame;
}

}  // namespace rolle
