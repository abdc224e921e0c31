#pragma once

#include "asw/image.hpp"
#include "asw/tensor.hpp"

#include <cstdint>
#include <string>
#include <variant>

namespace asw {

struct Jpeg {
  int quality;  // [1,100]
};
struct GaussianBlur {
  int kernel;  // odd, >= 3; sigma follows 0.3*((k-1)/2 - 1) + 0.8
};
struct MedianBlur {
  int kernel;  // odd, >= 3
};
struct GaussianNoise {
  double sigma;  // on the [0,1] intensity scale
};
struct PoissonNoise {
  double strength;  // blend weight a in out = clip((1-a)x + a*Poisson(255x)/255)
};
struct SaltPepper {
  double prob;  // per-pixel hit probability, all three channels together
};
struct Brightness {
  double factor;  // out = factor * x
};
struct Contrast {
  double factor;  // out = mean_luma + factor * (x - mean_luma)
};
struct Saturation {
  double factor;  // per-pixel blend between luma and the original color
};
struct Cropout {
  double area_fraction;  // one random rectangle of this area gets host pixels
};
struct Resize {
  enum class Axis { Both, Width };
  double ratio;  // (0,2]
  Axis axis = Axis::Both;
};
struct Rotation {
  double degrees;
};

using DistortionKind = std::variant<Jpeg, GaussianBlur, MedianBlur, GaussianNoise, PoissonNoise,
                                    SaltPepper, Brightness, Contrast, Saturation, Cropout,
                                    Resize, Rotation>;

struct DistortionSpec {
  DistortionKind kind;
  std::uint64_t noise_seed = 0;

  void validate() const;
  std::string name() const;  // report label: "jpeg", "gaussian_noise", "resize_width", ...
  double level() const;      // the scalar strength knob
};

/// Builds a spec from a report label and its level; the labels match name().
DistortionSpec make_spec(const std::string& kind_name, double level,
                         std::uint64_t noise_seed);

/// Applies one distortion to an 8-bit image. All randomness comes from a
/// stream derived from spec.noise_seed, so equal inputs give equal outputs.
/// Resize and Rotation run the forward transform and then the inverse so the
/// output always matches the input dimensions. Cropout needs `host` (the
/// replaced rectangle shows host pixels); the other kinds ignore it.
ImageU8 apply(const ImageU8& image, const DistortionSpec& spec, const ImageU8* host = nullptr);

/// Gaussian noise fields on disjoint random supports: a Bernoulli(0.5) mask
/// M picks which entries go to n_plus, the rest to n_minus, so the two are
/// exactly orthogonal.
struct OrthogonalNoisePair {
  Tensor n_plus;
  Tensor n_minus;
  Tensor mask;  // 1 where n_plus may be nonzero
};

OrthogonalNoisePair make_orthogonal_noise(Eigen::Index channels, Eigen::Index height,
                                          Eigen::Index width, double sigma,
                                          std::uint64_t seed);

}  // namespace asw
