#pragma once

#include <vector>

#include "rolle/image.hpp"

namespace rolle::perception {

// Network input: Y, U, V planes of 66 rows x 200 columns, normalized to [-1, 1].
struct InputTensor {
  static constexpr int kChannels = 3;
  static constexpr int kHeight = 66;
  static constexpr int kWidth = 200;
  static constexpr std::size_t kSize = std::size_t{kChannels} * kHeight * kWidth;

  std::vector<float> values = std::vector<float>(kSize, 0.0f);

  float at(int channel, int row, int col) const {
    return values[(static_cast<std::size_t>(channel) * kHeight + static_cast<std::size_t>(row)) * kWidth +
                  static_cast<std::size_t>(col)];
  }
};

// crop_top is given for a frame of reference_height rows and scales with the
// actual frame height, so any raw resolution lands on the same road region.
struct PreprocessConfig {
  int crop_top = 134;
  int reference_height = 240;
  int crop_rows_for(int height) const;
};

// (r, c) -> (H-1-r, W-1-c).
ImageFrame rotate180(const ImageFrame& f);

// Keeps rows [top_rows, height). Throws InvalidCropError unless 0 <= top_rows < height.
ImageFrame crop_road_region(const ImageFrame& f, int top_rows);

// Pixel-centre aligned bilinear resize with edge clamping, rounding half up.
// Source must be at least 2x2.
ImageFrame resize_bilinear(const ImageFrame& f, int out_w = InputTensor::kWidth,
                           int out_h = InputTensor::kHeight);

// Full-range BT.601; output channels are Y, U, V.
ImageFrame rgb_to_yuv(const ImageFrame& f);

// rotate180 -> crop -> resize to 200x66 -> YUV -> x/127.5 - 1, split into planes.
InputTensor preprocess(const ImageFrame& raw, const PreprocessConfig& cfg = {});

}  // namespace rolle::perception
