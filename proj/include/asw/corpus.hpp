#pragma once

#include "asw/image.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace asw {

/// Deterministic synthetic test image: multi-octave value noise shaded
/// through a random color ramp, a few soft geometric shapes, a directional
/// illumination gradient, and mild grain. (seed, size) fully determine the
/// pixels, so benchmarks need no external dataset.
ImageU8 synth_image(int width, int height, std::uint64_t seed);

/// Writes `count` synthetic PNGs (img_000.png, img_001.png, ...) into dir.
/// Returns the file paths in index order.
std::vector<std::string> write_corpus(const std::string& dir, int count, int size,
                                      std::uint64_t seed);

}  // namespace asw
