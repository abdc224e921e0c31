#pragma once

#include "asw/decoder.hpp"
#include "asw/image.hpp"
#include "asw/message.hpp"
#include "asw/tensor.hpp"

#include <cstdint>
#include <vector>

namespace asw {

/// Mean binary cross-entropy between per-bit probabilities and a message.
/// Probabilities are clamped to [1e-12, 1-1e-12] before the logs.
double watermark_loss(const Tensor& probs, const WatermarkMessage& w);

/// Mean squared difference over all values of two same-shape tensors.
double image_loss(const Tensor& a, const Tensor& b);

/// Knobs of the adversarial embedding loop.
struct EmbedConfig {
  double alpha = 0.75;          // fidelity weight in L_all = L_w + alpha * L_i
  int iters = 25;               // optimizer step budget per attempt
  double eta = 0.05;            // first trial step of the first iteration
  double epsilon = 0.005;       // re-embedding ball radius around the host
  double psnr_floor_db = 33.0;  // quality gate for accepting an attempt
  int max_retries = 5;
  double conv_tol = 1e-3;  // relative-change threshold on the loss trace
  int conv_window = 3;     // trailing steps the threshold must hold over

  void validate() const;
};

struct EmbedResult {
  ImageU8 watermarked;
  bool success = false;  // quantized image decodes to the message and clears the PSNR floor
  int iterations_used = 0;
  int retries = 0;
  double final_Lw = 0.0;
  double final_Li = 0.0;
  double final_Lall = 0.0;
  double psnr_db = 0.0;                   // watermarked vs (quantized) host
  std::vector<double> loss_trace;         // L_all at the start and after every step
};

/// Embeds `message` into `host` (a 3xHxW tensor in [0,1]) by minimizing
/// L_all = L_w + alpha * L_i over the pixels with bounded-memory quasi-Newton
/// steps, clipping to [0,1] after each step. Stops early once the thresholded
/// decoder output equals the message and the loss trace has flattened, then
/// quantizes to 8 bits. If the quantized image fails to decode or falls below
/// the PSNR floor, retries from a uniform epsilon-ball perturbation of the
/// host, drawn from a stream seeded by rng_seed, up to max_retries times.
/// Returns the best attempt: successful ones first, then highest PSNR.
EmbedResult embed(const DecoderConfig& cfg, const DecoderWeights& w, const Tensor& host,
                  const WatermarkMessage& message, const EmbedConfig& ec,
                  std::uint64_t rng_seed);

/// Dequantizes to [0,1] and thresholds one decoder pass.
WatermarkMessage extract(const DecoderConfig& cfg, const DecoderWeights& w,
                         const ImageU8& image);

}  // namespace asw
