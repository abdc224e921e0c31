#pragma once

#include "asw/image.hpp"

#include <vector>

namespace asw {

struct MetricReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
  double ber_percent = 0.0;
};

/// 10*log10(255^2 / MSE) over all channels of two 8-bit images.
/// Identical images return the 99.0 dB cap.
double psnr(const ImageU8& a, const ImageU8& b);

/// Mean structural similarity: per-channel 11x11 Gaussian window with
/// sigma 1.5, K1=0.01, K2=0.03, L=255, averaged over the valid window
/// positions and the three channels. Needs min(H,W) >= 11.
double ssim(const ImageU8& a, const ImageU8& b);

/// 100 * Hamming(a,b) / length.
double ber_percent(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace asw
