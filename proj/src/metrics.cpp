#include "asw/metrics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace asw {

namespace {

void check_pair(const ImageU8& a, const ImageU8& b, const char* op) {
  if (!a.valid() || !b.valid() || a.width != b.width || a.height != b.height)
    throw std::invalid_argument(std::string(op) + ": image dimensions mismatch");
}

using Mat = Eigen::MatrixXd;

Mat channel_plane(const ImageU8& img, int c) {
  Mat m(img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) m(y, x) = static_cast<double>(img.at(y, x, c));
  return m;
}

// 'valid' separable correlation with an odd symmetric kernel.
Mat filter_valid(const Mat& img, const Eigen::VectorXd& kernel) {
  const int k = static_cast<int>(kernel.size());
  const int H = static_cast<int>(img.rows()), W = static_cast<int>(img.cols());
  Mat horiz(H, W - k + 1);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x + k <= W; ++x) horiz(y, x) = img.row(y).segment(x, k).dot(kernel);
  Mat out(H - k + 1, W - k + 1);
  for (int x = 0; x < horiz.cols(); ++x)
    for (int y = 0; y + k <= H; ++y) out(y, x) = horiz.col(x).segment(y, k).dot(kernel);
  return out;
}

}  // namespace

double psnr(const ImageU8& a, const ImageU8& b) {
  check_pair(a, b, "psnr");
  double se = 0.0;
  for (size_t i = 0; i < a.rgb.size(); ++i) {
    const double d = static_cast<double>(a.rgb[i]) - static_cast<double>(b.rgb[i]);
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.rgb.size());
  if (mse == 0.0) return 99.0;
  return std::min(99.0, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double ssim(const ImageU8& a, const ImageU8& b) {
  check_pair(a, b, "ssim");
  constexpr int kWindow = 11;
  constexpr double kSigma = 1.5;
  constexpr double kL = 255.0;
  constexpr double kC1 = (0.01 * kL) * (0.01 * kL);
  constexpr double kC2 = (0.03 * kL) * (0.03 * kL);
  if (a.width < kWindow || a.height < kWindow)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");

  Eigen::VectorXd g(kWindow);
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - (kWindow - 1) / 2.0;
    g[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
  }
  g /= g.sum();

  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    const Mat x = channel_plane(a, c);
    const Mat y = channel_plane(b, c);
    const Mat mu_x = filter_valid(x, g);
    const Mat mu_y = filter_valid(y, g);
    const Mat sxx = filter_valid(x.cwiseProduct(x), g) - mu_x.cwiseProduct(mu_x);
    const Mat syy = filter_valid(y.cwiseProduct(y), g) - mu_y.cwiseProduct(mu_y);
    const Mat sxy = filter_valid(x.cwiseProduct(y), g) - mu_x.cwiseProduct(mu_y);

    const auto num = (2.0 * mu_x.cwiseProduct(mu_y).array() + kC1) * (2.0 * sxy.array() + kC2);
    const auto den = (mu_x.array().square() + mu_y.array().square() + kC1) *
                     (sxx.array() + syy.array() + kC2);
    total += (num / den).mean();
  }
  return total / 3.0;
}

double ber_percent(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("ber: messages must be non-empty and of equal length");
  int mismatches = 0;
  for (size_t i = 0; i < a.size(); ++i) mismatches += a[i] != b[i];
  return 100.0 * static_cast<double>(mismatches) / static_cast<double>(a.size());
}

}  // namespace asw
