#include "rolle/perception.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rolle/errors.hpp"

namespace rolle::perception {
namespace {

std::uint8_t round_to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

}  // namespace

ImageFrame rotate180(const ImageFrame& f) {
  f.validate();
  ImageFrame out = f;
  const std::size_t n = static_cast<std::size_t>(f.width) * static_cast<std::size_t>(f.height);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    out.pixels[3 * j] = f.pixels[3 * i];
    out.pixels[3 * j + 1] = f.pixels[3 * i + 1];
    out.pixels[3 * j + 2] = f.pixels[3 * i + 2];
  }
  return out;
}

ImageFrame crop_road_region(const ImageFrame& f, int top_rows) {
  f.validate();
  if (top_rows < 0 || top_rows >= f.height)
    throw InvalidCropError("crop of " + std::to_string(top_rows) + " rows invalid for a " +
                           std::to_string(f.height) + "-row frame");
  ImageFrame out(f.width, f.height - top_rows, f.timestamp_ms);
  std::copy(f.pixels.begin() + static_cast<std::ptrdiff_t>(f.index(top_rows, 0)), f.pixels.end(),
            out.pixels.begin());
  return out;
}

ImageFrame resize_bilinear(const ImageFrame& f, int out_w, int out_h) {
  f.validate();
  if (f.width < 2 || f.height < 2) throw ImageError("resize source must be at least 2x2");
  if (out_w < 1 || out_h < 1) throw ImageError("resize target must be at least 1x1");
  ImageFrame out(out_w, out_h, f.timestamp_ms);
  const double sx = static_cast<double>(f.width) / out_w;
  const double sy = static_cast<double>(f.height) / out_h;

  struct Tap {
    int i0, i1;
    double frac;
  };
  auto taps = [](int n_out, int n_in, double scale) {
    std::vector<Tap> t(static_cast<std::size_t>(n_out));
    for (int d = 0; d < n_out; ++d) {
      const double src = std::clamp((d + 0.5) * scale - 0.5, 0.0, static_cast<double>(n_in - 1));
      const int i0 = static_cast<int>(std::floor(src));
      const int i1 = std::min(i0 + 1, n_in - 1);
      t[static_cast<std::size_t>(d)] = {i0, i1, src - i0};
    }
    return t;
  };
  const auto xt = taps(out_w, f.width, sx);
  const auto yt = taps(out_h, f.height, sy);

  for (int y = 0; y < out_h; ++y) {
    const auto& ty = yt[static_cast<std::size_t>(y)];
    for (int x = 0; x < out_w; ++x) {
      const auto& tx = xt[static_cast<std::size_t>(x)];
      const std::size_t a = f.index(ty.i0, tx.i0), b = f.index(ty.i0, tx.i1);
      const std::size_t c = f.index(ty.i1, tx.i0), d = f.index(ty.i1, tx.i1);
      const std::size_t o = out.index(y, x);
      for (int ch = 0; ch < 3; ++ch) {
        const double top = f.pixels[a + ch] + (f.pixels[b + ch] - f.pixels[a + ch]) * tx.frac;
        const double bot = f.pixels[c + ch] + (f.pixels[d + ch] - f.pixels[c + ch]) * tx.frac;
        out.pixels[o + static_cast<std::size_t>(ch)] = round_to_byte(top + (bot - top) * ty.frac);
      }
    }
  }
  return out;
}

ImageFrame rgb_to_yuv(const ImageFrame& f) {
  f.validate();
  ImageFrame out(f.width, f.height, f.timestamp_ms);
  for (std::size_t i = 0; i < f.pixels.size(); i += 3) {
    const double r = f.pixels[i], g = f.pixels[i + 1], b = f.pixels[i + 2];
    out.pixels[i] = round_to_byte(0.299 * r + 0.587 * g + 0.114 * b);
    out.pixels[i + 1] = round_to_byte(128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b);
    out.pixels[i + 2] = round_to_byte(128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b);
  }
  return out;
}

int PreprocessConfig::crop_rows_for(int height) const {
  if (height == reference_height) return crop_top;
  const auto scaled = static_cast<int>(std::lround(static_cast<double>(crop_top) * height / reference_height));
  return std::clamp(scaled, 0, std::max(0, height - 2));
}

InputTensor preprocess(const ImageFrame& raw, const PreprocessConfig& cfg) {
  const ImageFrame upright = rotate180(raw);
  const ImageFrame road = crop_road_region(upright, cfg.crop_rows_for(upright.height));
  const ImageFrame yuv = rgb_to_yuv(resize_bilinear(road));
  InputTensor t;
  constexpr std::size_t plane = std::size_t{InputTensor::kHeight} * InputTensor::kWidth;
  for (std::size_t p = 0; p < plane; ++p)
    for (std::size_t ch = 0; ch < 3; ++ch)
      t.values[ch * plane + p] = static_cast<float>(yuv.pixels[3 * p + ch] / 127.5 - 1.0);
  return t;
}

}  // namespace rolle::perception
