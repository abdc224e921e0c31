#include "asw/image.hpp"

#include <algorithm>
#include <cmath>

namespace asw {

Tensor image_to_tensor(const ImageU8& img) {
  detail::check(img.valid(), "image_to_tensor: malformed image");
  Tensor t({3, img.height, img.width});
  constexpr double inv = 1.0 / 255.0;
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) t(c, y, x) = img.at(y, x, c) * inv;
  return t;
}

std::uint8_t quantize_channel_value(double v) {
  const long long q = std::llround(v * 255.0);  // rounds half away from zero
  return static_cast<std::uint8_t>(q < 0 ? 0 : (q > 255 ? 255 : q));
}

ImageU8 tensor_to_image(const Tensor& t) {
  detail::check(t.rank() == 3 && t.dim(0) == 3, "tensor_to_image: expected 3xHxW tensor");
  ImageU8 img;
  img.height = static_cast<int>(t.dim(1));
  img.width = static_cast<int>(t.dim(2));
  img.rgb.resize(static_cast<size_t>(img.width) * img.height * 3);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) img.at(y, x, c) = quantize_channel_value(t(c, y, x));
  return img;
}

ImageU8 resize_bilinear(const ImageU8& img, int new_width, int new_height) {
  detail::check(img.valid(), "resize_bilinear: invalid image");
  detail::check(new_width > 0 && new_height > 0, "resize_bilinear: target must be positive");
  ImageU8 out;
  out.width = new_width;
  out.height = new_height;
  out.rgb.resize(static_cast<size_t>(new_width) * new_height * 3);
  const double sx = static_cast<double>(img.width) / new_width;
  const double sy = static_cast<double>(img.height) / new_height;
  for (int y = 0; y < new_height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < new_width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - wx) * img.at(y0, x0, c) + wx * img.at(y0, x1, c);
        const double bot = (1.0 - wx) * img.at(y1, x0, c) + wx * img.at(y1, x1, c);
        const long long q = std::llround((1.0 - wy) * top + wy * bot);
        out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp<long long>(q, 0, 255));
      }
    }
  }
  return out;
}

}  // namespace asw
