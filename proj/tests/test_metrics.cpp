#include "doctest.h"

#include <asw/corpus.hpp>
#include <asw/metrics.hpp>

#include <cmath>

using asw::ImageU8;

namespace {

ImageU8 constant_image(int w, int h, std::uint8_t v) {
  ImageU8 img;
  img.width = w;
  img.height = h;
  img.rgb.assign(static_cast<size_t>(w) * h * 3, v);
  return img;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("psnr of identical images hits the cap") {
  ImageU8 a = asw::synth_image(32, 32, 1);
  CHECK(asw::psnr(a, a) == 99.0);
}

TEST_CASE("psnr closed form for a single flipped value") {
  // One channel value off by the full range: MSE = 255^2 / N, so
  // PSNR = 10 log10(N) with N = 3 * W * H.
  ImageU8 a = constant_image(256, 256, 0);
  ImageU8 b = a;
  b.at(10, 20, 1) = 255;
  const double want = 10.0 * std::log10(3.0 * 256.0 * 256.0);
  CHECK(asw::psnr(a, b) == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("psnr closed form for a uniform offset") {
  ImageU8 a = constant_image(64, 64, 100);
  ImageU8 b = constant_image(64, 64, 110);
  const double want = 10.0 * std::log10(255.0 * 255.0 / 100.0);
  CHECK(asw::psnr(a, b) == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("psnr requires matching dimensions") {
  ImageU8 a = constant_image(32, 32, 0);
  ImageU8 b = constant_image(32, 16, 0);
  CHECK_THROWS_AS(asw::psnr(a, b), std::invalid_argument);
}

TEST_CASE("ssim of identical images is one") {
  ImageU8 a = asw::synth_image(48, 48, 2);
  CHECK(asw::ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ssim drops for an inverted image") {
  ImageU8 a = asw::synth_image(64, 64, 3);
  ImageU8 b = a;
  for (auto& v : b.rgb) v = static_cast<std::uint8_t>(255 - v);
  CHECK(asw::ssim(a, b) < 0.2);
}

TEST_CASE("ssim ranks light damage above heavy damage") {
  ImageU8 a = asw::synth_image(64, 64, 4);
  ImageU8 light = a, heavy = a;
  for (size_t i = 0; i < a.rgb.size(); i += 7)
    light.rgb[i] = static_cast<std::uint8_t>(std::min(255, light.rgb[i] + 4));
  for (size_t i = 0; i < a.rgb.size(); i += 2)
    heavy.rgb[i] = static_cast<std::uint8_t>((heavy.rgb[i] + 128) % 256);
  const double s_light = asw::ssim(a, light);
  const double s_heavy = asw::ssim(a, heavy);
  CHECK(s_light > s_heavy);
  CHECK(s_light > 0.9);
}

TEST_CASE("ssim needs at least the window size") {
  ImageU8 a = constant_image(10, 10, 50);
  CHECK_THROWS_AS(asw::ssim(a, a), std::invalid_argument);
  ImageU8 b = constant_image(11, 11, 50);
  CHECK_NOTHROW(asw::ssim(b, b));
}

TEST_CASE("ber counts mismatched bits as a percentage") {
  CHECK(asw::ber_percent({0, 1, 1, 0}, {0, 1, 1, 0}) == 0.0);
  CHECK(asw::ber_percent({0, 1, 1, 0}, {0, 1, 0, 1}) == 50.0);
  CHECK(asw::ber_percent({1, 1}, {0, 0}) == 100.0);
  CHECK_THROWS_AS(asw::ber_percent({0, 1}, {0}), std::invalid_argument);
  CHECK_THROWS_AS(asw::ber_percent({}, {}), std::invalid_argument);
}

}
