#pragma once

#include "asw/image.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace asw {

/// Loads a PNG or JPEG file (detected by magic bytes) as 8-bit RGB.
/// Palette, grayscale, 16-bit and alpha variants are normalized to RGB8.
ImageU8 load_image(const std::string& path);

void save_png(const ImageU8& img, const std::string& path);

/// Baseline sequential JFIF encode with 4:2:0 chroma subsampling and
/// standard libjpeg quality scaling. quality in [1,100].
std::vector<std::uint8_t> jpeg_encode(const ImageU8& img, int quality);

ImageU8 jpeg_decode(const std::vector<std::uint8_t>& bytes);

}  // namespace asw
