#pragma once

#include "asw/rng.hpp"

#include <string>
#include <vector>

namespace asw {

/// A t-bit watermark message.
struct WatermarkMessage {
  std::vector<int> bits;

  int length() const { return static_cast<int>(bits.size()); }
  bool operator==(const WatermarkMessage& o) const { return bits == o.bits; }

  std::string to_bit_string() const;

  /// Parses either a bit string ("0101...", must be exactly t characters) or
  /// a hex string ("0x1f..." or, when not all characters are 0/1, bare hex);
  /// hex digits are expanded MSB-first and the first t bits are taken.
  static WatermarkMessage parse(const std::string& text, int t);

  static WatermarkMessage random(int t, RandomStream& rng);
};

}  // namespace asw
