#pragma once

#include "asw/tensor.hpp"

#include <cstdint>
#include <vector>

namespace asw {

/// 8-bit RGB image, interleaved row-major (the layout the codecs use).
struct ImageU8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // height * width * 3 bytes

  bool valid() const {
    return width > 0 && height > 0 &&
           rgb.size() == static_cast<size_t>(width) * static_cast<size_t>(height) * 3;
  }
  std::uint8_t& at(int y, int x, int c) { return rgb[(static_cast<size_t>(y) * width + x) * 3 + c]; }
  std::uint8_t at(int y, int x, int c) const {
    return rgb[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
  bool operator==(const ImageU8& o) const {
    return width == o.width && height == o.height && rgb == o.rgb;
  }
};

/// Planar 3xHxW float tensor in [0,1] from an 8-bit image.
Tensor image_to_tensor(const ImageU8& img);

/// Quantizes a [0,1] float image to 8 bits: round(255*v) half away from
/// zero, clamped to [0,255].
ImageU8 tensor_to_image(const Tensor& t);

std::uint8_t quantize_channel_value(double v);

/// Bilinear resample to new dimensions (pixel-center sampling convention).
ImageU8 resize_bilinear(const ImageU8& img, int new_width, int new_height);

}  // namespace asw
