#include "rolle/learning/augment.hpp"

#include <algorithm>
#include <cmath>

namespace rolle::learning {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ImageFrame flip_horizontal(const ImageFrame& f) {
  f.validate();
  ImageFrame out(f.width, f.height, f.timestamp_ms);
  for (int r = 0; r < f.height; ++r)
    for (int c = 0; c < f.width; ++c) out.set(r, f.width - 1 - c, f.at(r, c));
  return out;
}

float negate_steering(float s) { return s == 0.0f ? 0.0f : -s; }

Example augment_flip(const Example& e) { return {flip_horizontal(e.frame), negate_steering(e.steering)}; }

ShadowParams draw_shadow(std::mt19937_64& rng) {
  ShadowParams p;
  p.x_top = unit_uniform(rng);
  p.x_bot = unit_uniform(rng);
  p.right_side = unit_uniform(rng) < 0.5;
  p.factor = 0.4 + 0.3 * unit_uniform(rng);
  return p;
}

bool in_shadow(const ShadowParams& p, int width, int height, int row, int col) {
  const double t = (row + 0.5) / height;
  const double edge = (p.x_top + (p.x_bot - p.x_top) * t) * width;
  const double x = col + 0.5;
  return p.right_side ? x >= edge : x < edge;
}

ImageFrame apply_shadow(const ImageFrame& f, const ShadowParams& p) {
  f.validate();
  ImageFrame out = f;
  for (int r = 0; r < f.height; ++r) {
    for (int c = 0; c < f.width; ++c) {
      if (!in_shadow(p, f.width, f.height, r, c)) continue;
      const std::size_t i = f.index(r, c);
      for (int k = 0; k < 3; ++k) {
        const double v = std::floor(f.pixels[i + k] * p.factor + 0.5);
        out.pixels[i + k] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
    }
  }
  return out;
}

Example augment_shadow(const Example& e, std::mt19937_64& rng) {
  return {apply_shadow(e.frame, draw_shadow(rng)), e.steering};
}

}  // namespace rolle::learning
