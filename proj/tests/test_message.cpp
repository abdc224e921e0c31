#include "doctest.h"

#include <asw/message.hpp>
#include <asw/rng.hpp>

#include <stdexcept>

using asw::RandomStream;
using asw::WatermarkMessage;

TEST_SUITE("message") {

TEST_CASE("bit string round trip") {
  WatermarkMessage m = WatermarkMessage::parse("0101", 4);
  CHECK(m.bits == std::vector<int>{0, 1, 0, 1});
  CHECK(m.to_bit_string() == "0101");
}

TEST_CASE("hex parses MSB first") {
  CHECK(WatermarkMessage::parse("0xff", 8).to_bit_string() == "11111111");
  CHECK(WatermarkMessage::parse("0xf0", 8).to_bit_string() == "11110000");
  CHECK(WatermarkMessage::parse("0xA5", 8).to_bit_string() == "10100101");
  // Bare strings with non-binary characters are read as hex too.
  CHECK(WatermarkMessage::parse("a5", 8).to_bit_string() == "10100101");
}

TEST_CASE("hex takes the first t bits") {
  CHECK(WatermarkMessage::parse("0x80", 3).to_bit_string() == "100");
  CHECK(WatermarkMessage::parse("0xcafe", 12).to_bit_string() == "110010101111");
}

TEST_CASE("an all-binary string is a bit pattern, not hex") {
  WatermarkMessage m = WatermarkMessage::parse("0110", 4);
  CHECK(m.bits == std::vector<int>{0, 1, 1, 0});
}

TEST_CASE("a binary-looking string of the wrong length falls back to hex") {
  CHECK(WatermarkMessage::parse("010", 4).to_bit_string() == "0000");
  CHECK(WatermarkMessage::parse("11", 8).to_bit_string() == "00010001");
}

TEST_CASE("length and character validation") {
  CHECK_THROWS_AS(WatermarkMessage::parse("0xzz", 8), std::invalid_argument);
  CHECK_THROWS_AS(WatermarkMessage::parse("grape", 8), std::invalid_argument);
  CHECK_THROWS_AS(WatermarkMessage::parse("0xf", 16), std::invalid_argument);
  CHECK_THROWS_AS(WatermarkMessage::parse("", 4), std::invalid_argument);
  CHECK_THROWS_AS(WatermarkMessage::parse("ff", 0), std::invalid_argument);
}

TEST_CASE("random messages are reproducible and balanced") {
  RandomStream a(5), b(5), c(6);
  WatermarkMessage ma = WatermarkMessage::random(36, a);
  WatermarkMessage mb = WatermarkMessage::random(36, b);
  WatermarkMessage mc = WatermarkMessage::random(36, c);
  CHECK(ma == mb);
  CHECK_FALSE(ma == mc);
  CHECK(ma.length() == 36);
  for (int bit : ma.bits) CHECK((bit == 0 || bit == 1));

  RandomStream r(7);
  int ones = 0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    WatermarkMessage m = WatermarkMessage::random(36, r);
    for (int bit : m.bits) ones += bit;
  }
  const double rate = ones / (36.0 * n);
  CHECK(rate > 0.45);
  CHECK(rate < 0.55);
}

}
