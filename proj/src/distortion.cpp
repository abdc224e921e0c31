#include "asw/distortion.hpp"

#include "asw/image_io.hpp"
#include "asw/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace asw {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::uint8_t clamp_round(double v) {
  return static_cast<std::uint8_t>(std::clamp<long long>(std::llround(v), 0, 255));
}

Mat channel_plane(const ImageU8& img, int c) {
  Mat m(img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) m(y, x) = static_cast<double>(img.at(y, x, c));
  return m;
}

void store_plane(ImageU8& img, int c, const Mat& m) {
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) img.at(y, x, c) = clamp_round(m(y, x));
}

// Mirror without repeating the edge sample (the ...cb|abc|bc... convention).
int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

ImageU8 gaussian_blur(const ImageU8& img, int k) {
  const double sigma = 0.3 * ((k - 1) / 2 - 1) + 0.8;
  const int half = k / 2;
  Eigen::VectorXd kern(k);
  for (int i = 0; i < k; ++i) {
    const double d = i - half;
    kern[i] = std::exp(-d * d / (2.0 * sigma * sigma));
  }
  kern /= kern.sum();

  ImageU8 out = img;
  for (int c = 0; c < 3; ++c) {
    const Mat src = channel_plane(img, c);
    Mat horiz(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        double acc = 0.0;
        for (int i = -half; i <= half; ++i)
          acc += kern[i + half] * src(y, reflect101(x + i, img.width));
        horiz(y, x) = acc;
      }
    Mat full(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        double acc = 0.0;
        for (int i = -half; i <= half; ++i)
          acc += kern[i + half] * horiz(reflect101(y + i, img.height), x);
        full(y, x) = acc;
      }
    store_plane(out, c, full);
  }
  return out;
}

ImageU8 median_blur(const ImageU8& img, int k) {
  const int half = k / 2;
  ImageU8 out = img;
  std::vector<std::uint8_t> window(static_cast<size_t>(k) * k);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        size_t n = 0;
        for (int dy = -half; dy <= half; ++dy)
          for (int dx = -half; dx <= half; ++dx)
            window[n++] = img.at(reflect101(y + dy, img.height), reflect101(x + dx, img.width), c);
        auto mid = window.begin() + static_cast<long>(n / 2);
        std::nth_element(window.begin(), mid, window.begin() + static_cast<long>(n));
        out.at(y, x, c) = *mid;
      }
  return out;
}

long long poisson_sample(RandomStream& rng, double lambda) {
  if (lambda <= 0.0) return 0;
  if (lambda < 30.0) {
    const double limit = std::exp(-lambda);
    double p = 1.0;
    long long k = -1;
    do {
      ++k;
      p *= rng.uniform_open();
    } while (p > limit);
    return k;
  }
  // Normal approximation; fine at this scale and keeps the stream cheap.
  return std::max<long long>(0, std::llround(lambda + std::sqrt(lambda) * rng.normal()));
}

// Rotation about the image center, bilinear sampling, zero outside the source.
ImageU8 rotate_bilinear(const ImageU8& img, double degrees) {
  const double rad = degrees * M_PI / 180.0;
  const double ca = std::cos(rad), sa = std::sin(rad);
  const double cx = (img.width - 1) / 2.0, cy = (img.height - 1) / 2.0;
  ImageU8 out;
  out.width = img.width;
  out.height = img.height;
  out.rgb.assign(static_cast<size_t>(img.width) * img.height * 3, 0);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      // Inverse map: where in the source does this output pixel come from.
      const double dx = x - cx, dy = y - cy;
      const double sxf = ca * dx + sa * dy + cx;
      const double syf = -sa * dx + ca * dy + cy;
      const int x0 = static_cast<int>(std::floor(sxf)), y0 = static_cast<int>(std::floor(syf));
      const double wx = sxf - x0, wy = syf - y0;
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int j = 0; j <= 1; ++j)
          for (int i = 0; i <= 1; ++i) {
            const int xs = x0 + i, ys = y0 + j;
            if (xs < 0 || xs >= img.width || ys < 0 || ys >= img.height) continue;
            acc += (i ? wx : 1.0 - wx) * (j ? wy : 1.0 - wy) * img.at(ys, xs, c);
          }
        out.at(y, x, c) = clamp_round(acc);
      }
    }
  return out;
}

}  // namespace

void DistortionSpec::validate() const {
  std::visit(
      [](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Jpeg>) {
          detail::check(k.quality >= 1 && k.quality <= 100, "jpeg: quality must be in [1,100]");
        } else if constexpr (std::is_same_v<T, GaussianBlur> || std::is_same_v<T, MedianBlur>) {
          detail::check(k.kernel >= 3 && k.kernel % 2 == 1, "blur: kernel must be odd and >= 3");
        } else if constexpr (std::is_same_v<T, GaussianNoise>) {
          detail::check(k.sigma >= 0.0, "gaussian_noise: sigma must be >= 0");
        } else if constexpr (std::is_same_v<T, PoissonNoise>) {
          detail::check(k.strength >= 0.0 && k.strength <= 1.0,
                        "poisson_noise: strength must be in [0,1]");
        } else if constexpr (std::is_same_v<T, SaltPepper>) {
          detail::check(k.prob >= 0.0 && k.prob <= 1.0, "salt_pepper: prob must be in [0,1]");
        } else if constexpr (std::is_same_v<T, Brightness> || std::is_same_v<T, Contrast> ||
                             std::is_same_v<T, Saturation>) {
          detail::check(k.factor >= 0.0 && std::isfinite(k.factor),
                        "photometric: factor must be finite and >= 0");
        } else if constexpr (std::is_same_v<T, Cropout>) {
          detail::check(k.area_fraction >= 0.0 && k.area_fraction <= 1.0,
                        "cropout: area fraction must be in [0,1]");
        } else if constexpr (std::is_same_v<T, Resize>) {
          detail::check(k.ratio > 0.0 && k.ratio <= 2.0, "resize: ratio must be in (0,2]");
        } else if constexpr (std::is_same_v<T, Rotation>) {
          detail::check(std::isfinite(k.degrees) && std::abs(k.degrees) <= 360.0,
                        "rotation: degrees must be finite, |deg| <= 360");
        }
      },
      kind);
}

std::string DistortionSpec::name() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Jpeg>) return "jpeg";
        if constexpr (std::is_same_v<T, GaussianBlur>) return "gaussian_blur";
        if constexpr (std::is_same_v<T, MedianBlur>) return "median_blur";
        if constexpr (std::is_same_v<T, GaussianNoise>) return "gaussian_noise";
        if constexpr (std::is_same_v<T, PoissonNoise>) return "poisson_noise";
        if constexpr (std::is_same_v<T, SaltPepper>) return "salt_pepper";
        if constexpr (std::is_same_v<T, Brightness>) return "brightness";
        if constexpr (std::is_same_v<T, Contrast>) return "contrast";
        if constexpr (std::is_same_v<T, Saturation>) return "saturation";
        if constexpr (std::is_same_v<T, Cropout>) return "cropout";
        if constexpr (std::is_same_v<T, Resize>)
          return k.axis == Resize::Axis::Width ? "resize_width" : "resize";
        if constexpr (std::is_same_v<T, Rotation>) return "rotation";
      },
      kind);
}

double DistortionSpec::level() const {
  return std::visit(
      [](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Jpeg>) return k.quality;
        if constexpr (std::is_same_v<T, GaussianBlur> || std::is_same_v<T, MedianBlur>)
          return k.kernel;
        if constexpr (std::is_same_v<T, GaussianNoise>) return k.sigma;
        if constexpr (std::is_same_v<T, PoissonNoise>) return k.strength;
        if constexpr (std::is_same_v<T, SaltPepper>) return k.prob;
        if constexpr (std::is_same_v<T, Brightness> || std::is_same_v<T, Contrast> ||
                      std::is_same_v<T, Saturation>)
          return k.factor;
        if constexpr (std::is_same_v<T, Cropout>) return k.area_fraction;
        if constexpr (std::is_same_v<T, Resize>) return k.ratio;
        if constexpr (std::is_same_v<T, Rotation>) return k.degrees;
      },
      kind);
}

DistortionSpec make_spec(const std::string& kind_name, double level,
                         std::uint64_t noise_seed) {
  DistortionSpec spec;
  spec.noise_seed = noise_seed;
  if (kind_name == "jpeg")
    spec.kind = Jpeg{static_cast<int>(std::llround(level))};
  else if (kind_name == "gaussian_blur")
    spec.kind = GaussianBlur{static_cast<int>(std::llround(level))};
  else if (kind_name == "median_blur")
    spec.kind = MedianBlur{static_cast<int>(std::llround(level))};
  else if (kind_name == "gaussian_noise")
    spec.kind = GaussianNoise{level};
  else if (kind_name == "poisson_noise")
    spec.kind = PoissonNoise{level};
  else if (kind_name == "salt_pepper")
    spec.kind = SaltPepper{level};
  else if (kind_name == "brightness")
    spec.kind = Brightness{level};
  else if (kind_name == "contrast")
    spec.kind = Contrast{level};
  else if (kind_name == "saturation")
    spec.kind = Saturation{level};
  else if (kind_name == "cropout")
    spec.kind = Cropout{level};
  else if (kind_name == "resize")
    spec.kind = Resize{level, Resize::Axis::Both};
  else if (kind_name == "resize_width")
    spec.kind = Resize{level, Resize::Axis::Width};
  else if (kind_name == "rotation")
    spec.kind = Rotation{level};
  else
    throw std::invalid_argument("unknown distortion kind: " + kind_name);
  spec.validate();
  return spec;
}

ImageU8 apply(const ImageU8& image, const DistortionSpec& spec, const ImageU8* host) {
  detail::check(image.valid(), "apply: invalid image");
  spec.validate();

  return std::visit(
      [&](const auto& k) -> ImageU8 {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Jpeg>) {
          return jpeg_decode(jpeg_encode(image, k.quality));
        } else if constexpr (std::is_same_v<T, GaussianBlur>) {
          return gaussian_blur(image, k.kernel);
        } else if constexpr (std::is_same_v<T, MedianBlur>) {
          return median_blur(image, k.kernel);
        } else if constexpr (std::is_same_v<T, GaussianNoise>) {
          RandomStream rng(spec.noise_seed);
          ImageU8 out = image;
          for (auto& v : out.rgb) v = clamp_round(v + 255.0 * k.sigma * rng.normal());
          return out;
        } else if constexpr (std::is_same_v<T, PoissonNoise>) {
          RandomStream rng(spec.noise_seed);
          ImageU8 out = image;
          for (auto& v : out.rgb) {
            const double shot = static_cast<double>(poisson_sample(rng, v));
            v = clamp_round((1.0 - k.strength) * v + k.strength * shot);
          }
          return out;
        } else if constexpr (std::is_same_v<T, SaltPepper>) {
          RandomStream rng(spec.noise_seed);
          ImageU8 out = image;
          for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x)
              if (rng.uniform() < k.prob) {
                const std::uint8_t v = rng.bernoulli(0.5) ? 255 : 0;
                out.at(y, x, 0) = out.at(y, x, 1) = out.at(y, x, 2) = v;
              }
          return out;
        } else if constexpr (std::is_same_v<T, Brightness>) {
          ImageU8 out = image;
          for (auto& v : out.rgb) v = clamp_round(k.factor * v);
          return out;
        } else if constexpr (std::is_same_v<T, Contrast>) {
          double mean = 0.0;
          for (int y = 0; y < image.height; ++y)
            for (int x = 0; x < image.width; ++x)
              mean += luma(image.at(y, x, 0), image.at(y, x, 1), image.at(y, x, 2));
          mean /= static_cast<double>(image.width) * image.height;
          ImageU8 out = image;
          for (auto& v : out.rgb) v = clamp_round(mean + k.factor * (v - mean));
          return out;
        } else if constexpr (std::is_same_v<T, Saturation>) {
          ImageU8 out = image;
          for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x) {
              const double l = luma(image.at(y, x, 0), image.at(y, x, 1), image.at(y, x, 2));
              for (int c = 0; c < 3; ++c)
                out.at(y, x, c) = clamp_round(l + k.factor * (image.at(y, x, c) - l));
            }
          return out;
        } else if constexpr (std::is_same_v<T, Cropout>) {
          detail::check(host != nullptr, "cropout: host image required");
          detail::check(host->valid() && host->width == image.width &&
                            host->height == image.height,
                        "cropout: host dimensions mismatch");
          const int rw = std::clamp<int>(
              static_cast<int>(std::llround(image.width * std::sqrt(k.area_fraction))), 0,
              image.width);
          const int rh = std::clamp<int>(
              static_cast<int>(std::llround(image.height * std::sqrt(k.area_fraction))), 0,
              image.height);
          ImageU8 out = image;
          if (rw == 0 || rh == 0) return out;
          RandomStream rng(spec.noise_seed);
          const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(image.width - rw + 1)));
          const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(image.height - rh + 1)));
          for (int y = y0; y < y0 + rh; ++y)
            for (int x = x0; x < x0 + rw; ++x)
              for (int c = 0; c < 3; ++c) out.at(y, x, c) = host->at(y, x, c);
          return out;
        } else if constexpr (std::is_same_v<T, Resize>) {
          const int nw = std::max(1, static_cast<int>(std::llround(image.width * k.ratio)));
          const int nh = k.axis == Resize::Axis::Width
                             ? image.height
                             : std::max(1, static_cast<int>(std::llround(image.height * k.ratio)));
          if (nw == image.width && nh == image.height) return image;
          return resize_bilinear(resize_bilinear(image, nw, nh), image.width, image.height);
        } else {
          static_assert(std::is_same_v<T, Rotation>);
          if (k.degrees == 0.0) return image;
          return rotate_bilinear(rotate_bilinear(image, k.degrees), -k.degrees);
        }
      },
      spec.kind);
}

OrthogonalNoisePair make_orthogonal_noise(Eigen::Index channels, Eigen::Index height,
                                          Eigen::Index width, double sigma,
                                          std::uint64_t seed) {
  detail::check(sigma >= 0.0, "make_orthogonal_noise: sigma must be >= 0");
  OrthogonalNoisePair pair;
  pair.n_plus = Tensor::zeros({channels, height, width});
  pair.n_minus = Tensor::zeros({channels, height, width});
  pair.mask = Tensor::zeros({channels, height, width});
  RandomStream rng(seed);
  for (Eigen::Index i = 0; i < pair.mask.size(); ++i) {
    const bool in_plus = rng.bernoulli(0.5);
    const double g = sigma * rng.normal();
    pair.mask(i) = in_plus ? 1.0 : 0.0;
    (in_plus ? pair.n_plus : pair.n_minus)(i) = g;
  }
  return pair;
}

}  // namespace asw
