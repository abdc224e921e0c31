#pragma once

#include "asw/nn_ops.hpp"
#include "asw/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace asw {

/// Architecture and key of the frozen shallow decoder.
///
/// The decoder is keyed by `seed`: all parameters are drawn from N(0,1) by a
/// counter-based PRNG, so (seed, config) fully determines the network.
struct DecoderConfig {
  std::uint64_t seed = 1;     // key, must be > 0
  int message_bits = 36;      // t
  int front_pool_stride = 4;  // s, one of {1,2,4,8}
  int depth = 3;              // d, number of Conv+IN+LeakyReLU groups, >= 3
  int channels = 64;          // hidden width C
  int kernel_size = 3;        // k, odd
  double leaky_slope = 0.2;
  double in_eps = 1e-5;

  void validate() const;
};

/// Spatial size of the fixed lattice the adaptive pool maps the last feature
/// map onto; the FC layer always sees channels * kPoolGrid^2 values, so the
/// weights are independent of the input image size.
inline constexpr int kPoolGrid = 3;

/// Flattened feature length entering the FC layer.
inline constexpr Eigen::Index feature_length(const DecoderConfig& cfg) {
  return static_cast<Eigen::Index>(cfg.channels) * kPoolGrid * kPoolGrid;
}

/// Stride of conv layer `layer` (0-based). The three backbone convs (the
/// first two and the last) downsample by 2; groups inserted before the last
/// conv to deepen the network keep the spatial size.
inline constexpr int conv_stride(const DecoderConfig& cfg, int layer) {
  return (layer <= 1 || layer == cfg.depth - 1) ? 2 : 1;
}

/// Frozen parameters of the shallow decoder.
struct DecoderWeights {
  std::vector<Tensor> conv_kernels;  // layer i: Cout x Cin x k x k
  Tensor fc_weight;                  // t x (C * kPoolGrid^2)
  Tensor fc_bias;                    // t
  std::uint64_t weights_digest = 0;  // content hash over the canonical order

  std::string digest_hex() const;
};

/// Output of one decoder forward pass.
struct DecoderForward {
  Tensor probs;    // t per-bit probabilities in [0,1]
  LayerTape tape;  // for backward_input_grad
};

/// Samples all parameters i.i.d. from N(0,1) using a Philox stream seeded by
/// cfg.seed. Canonical draw order: conv kernels front to back, each tensor
/// row-major, then fc_weight row-major, then fc_bias.
DecoderWeights build_decoder(const DecoderConfig& cfg);

/// AvgPool(s) -> [Conv(pad k/2) -> IN -> LeakyReLU] x d
/// -> adaptive AvgPool onto the fixed kPoolGrid lattice -> FC -> sigmoid.
DecoderForward decoder_forward(const DecoderConfig& cfg, const DecoderWeights& w,
                               const Tensor& image);

/// Forward pass without recording a tape.
Tensor decoder_probs(const DecoderConfig& cfg, const DecoderWeights& w, const Tensor& image);

/// Hard bits: bit_i = 1 iff probs_i >= 0.5.
std::vector<int> threshold_bits(const Tensor& probs);

/// Single forward pass plus thresholding.
std::vector<int> extract_message(const DecoderConfig& cfg, const DecoderWeights& w,
                                 const Tensor& image);

}  // namespace asw
