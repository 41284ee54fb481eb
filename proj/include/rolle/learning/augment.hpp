#pragma once

#include <cstdint>
#include <random>

#include "rolle/image.hpp"

namespace rolle::learning {

// Uniform in [0, 1) from the top 53 bits; portable across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// splitmix64 finalizer, used to derive independent sub-seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct Example {
  ImageFrame frame;  // raw capture
  float steering = 0.0f;
};

// Mirrors columns and negates steering; a zero label stays +0.
Example augment_flip(const Example& e);
ImageFrame flip_horizontal(const ImageFrame& f);
float negate_steering(float s);

// Shadow edge runs from (x_top, 0) to (x_bot, H); x positions are fractions
// of the frame width. Pixels on the chosen side are scaled by factor.
struct ShadowParams {
  double x_top = 0.0;
  double x_bot = 0.0;
  bool right_side = false;
  double factor = 0.5;
};

ShadowParams draw_shadow(std::mt19937_64& rng);
// True when pixel (row, col) lies in the shadowed region.
bool in_shadow(const ShadowParams& p, int width, int height, int row, int col);
ImageFrame apply_shadow(const ImageFrame& f, const ShadowParams& p);
Example augment_shadow(const Example& e, std::mt19937_64& rng);

}  // namespace rolle::learning
