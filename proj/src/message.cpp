#include "asw/message.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace asw {

std::string WatermarkMessage::to_bit_string() const {
  std::string s;
  s.reserve(bits.size());
  for (int b : bits) s.push_back(b ? '1' : '0');
  return s;
}

WatermarkMessage WatermarkMessage::parse(const std::string& text, int t) {
  if (t <= 0) throw std::invalid_argument("message: bit count must be positive");
  std::string body = text;
  bool forced_hex = false;
  if (body.rfind("0x", 0) == 0 || body.rfind("0X", 0) == 0) {
    body = body.substr(2);
    forced_hex = true;
  }
  if (body.empty()) throw std::invalid_argument("message: empty string");

  const bool binary_alphabet =
      std::all_of(body.begin(), body.end(), [](char c) { return c == '0' || c == '1'; });

  WatermarkMessage m;
  if (!forced_hex && binary_alphabet && static_cast<int>(body.size()) == t) {
    for (char c : body) m.bits.push_back(c - '0');
    return m;
  }

  // Hex: expand each digit MSB-first and keep the leading t bits.
  for (char c : body) {
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else throw std::invalid_argument("message: not a bit string of length t nor valid hex");
    for (int i = 3; i >= 0; --i) m.bits.push_back((v >> i) & 1);
  }
  if (static_cast<int>(m.bits.size()) < t)
    throw std::invalid_argument("message: hex string encodes fewer than t bits");
  m.bits.resize(static_cast<size_t>(t));
  return m;
}

WatermarkMessage WatermarkMessage::random(int t, RandomStream& rng) {
  WatermarkMessage m;
  m.bits.reserve(static_cast<size_t>(t));
  for (int i = 0; i < t; ++i) m.bits.push_back(rng.bernoulli(0.5) ? 1 : 0);
  return m;
}

}  // namespace asw
