#include "asw/decoder.hpp"

#include "asw/rng.hpp"

#include <cstring>

namespace asw {

namespace {

// FNV-1a over the IEEE754 bit patterns of the draws, in draw order.
struct Fnv1a {
  std::uint64_t h = 0xCBF29CE484222325ull;
  void add(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xFFu;
      h *= 0x100000001B3ull;
    }
  }
};

void fill_normal(Tensor& t, RandomStream& rng, Fnv1a& digest) {
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double v = rng.normal();
    t(i) = v;
    digest.add(v);
  }
}

}  // namespace

void DecoderConfig::validate() const {
  detail::check(seed > 0, "DecoderConfig: seed must be positive");
  detail::check(message_bits > 0, "DecoderConfig: message_bits must be positive");
  detail::check(front_pool_stride == 1 || front_pool_stride == 2 || front_pool_stride == 4 ||
                    front_pool_stride == 8,
                "DecoderConfig: front_pool_stride must be one of {1,2,4,8}");
  detail::check(depth >= 3, "DecoderConfig: depth must be >= 3");
  detail::check(channels > 0, "DecoderConfig: channels must be positive");
  detail::check(kernel_size > 0 && kernel_size % 2 == 1,
                "DecoderConfig: kernel_size must be odd and positive");
  detail::check(leaky_slope > 0.0 && leaky_slope < 1.0,
                "DecoderConfig: leaky_slope must be in (0,1)");
  detail::check(in_eps > 0.0, "DecoderConfig: in_eps must be positive");
}

std::string DecoderWeights::digest_hex() const {
  static const char* hexd = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 0; i < 16; ++i) s[i] = hexd[(weights_digest >> (60 - 4 * i)) & 0xF];
  return s;
}

DecoderWeights build_decoder(const DecoderConfig& cfg) {
  cfg.validate();
  RandomStream rng(cfg.seed);
  Fnv1a digest;

  DecoderWeights w;
  w.conv_kernels.reserve(static_cast<size_t>(cfg.depth));
  Eigen::Index in_ch = 3;
  for (int layer = 0; layer < cfg.depth; ++layer) {
    Tensor kernel({cfg.channels, in_ch, cfg.kernel_size, cfg.kernel_size});
    fill_normal(kernel, rng, digest);
    w.conv_kernels.push_back(std::move(kernel));
    in_ch = cfg.channels;
  }
  w.fc_weight.resize({cfg.message_bits, feature_length(cfg)});
  fill_normal(w.fc_weight, rng, digest);
  w.fc_bias.resize({cfg.message_bits});
  fill_normal(w.fc_bias, rng, digest);
  w.weights_digest = digest.h;
  return w;
}

namespace {

Tensor run_pipeline(const DecoderConfig& cfg, const DecoderWeights& w, const Tensor& image,
                    LayerTape* tape) {
  cfg.validate();
  detail::check(image.rank() == 3 && image.dim(0) == 3, "decoder_forward: expected 3xHxW image");
  detail::check(static_cast<int>(w.conv_kernels.size()) == cfg.depth,
                "decoder_forward: weights do not match config depth");
  detail::check(image.dim(1) % cfg.front_pool_stride == 0 &&
                    image.dim(2) % cfg.front_pool_stride == 0,
                "decoder_forward: image size not divisible by front pool stride");

  const int pad = cfg.kernel_size / 2;
  Tensor x = avg_pool2d(image, cfg.front_pool_stride, tape);
  for (int layer = 0; layer < cfg.depth; ++layer) {
    x = conv2d(x, w.conv_kernels[static_cast<size_t>(layer)], conv_stride(cfg, layer), pad, tape);
    x = instance_norm(x, cfg.in_eps, tape);
    x = leaky_relu(x, cfg.leaky_slope, tape);
  }
  Tensor v = adaptive_avg_pool_flatten(x, kPoolGrid, tape);
  Tensor logits = fully_connected(v, w.fc_weight, w.fc_bias, tape);
  return sigmoid(logits, tape);
}

}  // namespace

DecoderForward decoder_forward(const DecoderConfig& cfg, const DecoderWeights& w,
                               const Tensor& image) {
  DecoderForward fwd;
  fwd.probs = run_pipeline(cfg, w, image, &fwd.tape);
  return fwd;
}

Tensor decoder_probs(const DecoderConfig& cfg, const DecoderWeights& w, const Tensor& image) {
  return run_pipeline(cfg, w, image, nullptr);
}

std::vector<int> threshold_bits(const Tensor& probs) {
  std::vector<int> bits(static_cast<size_t>(probs.size()));
  for (Eigen::Index i = 0; i < probs.size(); ++i) bits[static_cast<size_t>(i)] = probs(i) >= 0.5 ? 1 : 0;
  return bits;
}

std::vector<int> extract_message(const DecoderConfig& cfg, const DecoderWeights& w,
                                 const Tensor& image) {
  return threshold_bits(decoder_probs(cfg, w, image));
}

}  // namespace asw
