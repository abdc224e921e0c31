#include "asw/corpus.hpp"

#include "asw/image_io.hpp"
#include "asw/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

namespace asw {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// Bilinearly interpolated random lattice, the classic value-noise octave.
Mat value_noise(int height, int width, int cells, RandomStream& rng) {
  Mat lattice(cells + 1, cells + 1);
  for (int i = 0; i <= cells; ++i)
    for (int j = 0; j <= cells; ++j) lattice(i, j) = rng.uniform();

  Mat out(height, width);
  for (int y = 0; y < height; ++y) {
    const double gy = static_cast<double>(y) / height * cells;
    const int i0 = std::min(static_cast<int>(gy), cells - 1);
    const double ty = smoothstep(gy - i0);
    for (int x = 0; x < width; ++x) {
      const double gx = static_cast<double>(x) / width * cells;
      const int j0 = std::min(static_cast<int>(gx), cells - 1);
      const double tx = smoothstep(gx - j0);
      const double top = (1.0 - tx) * lattice(i0, j0) + tx * lattice(i0, j0 + 1);
      const double bot = (1.0 - tx) * lattice(i0 + 1, j0) + tx * lattice(i0 + 1, j0 + 1);
      out(y, x) = (1.0 - ty) * top + ty * bot;
    }
  }
  return out;
}

}  // namespace

ImageU8 synth_image(int width, int height, std::uint64_t seed) {
  if (width < 8 || height < 8) throw std::invalid_argument("synth_image: size too small");
  RandomStream rng(seed);

  // Luminance field: five octaves of value noise.
  Mat field = Mat::Zero(height, width);
  double amp = 1.0, amp_sum = 0.0;
  for (int octave = 0; octave < 5; ++octave) {
    field += amp * value_noise(height, width, 3 << octave, rng);
    amp_sum += amp;
    amp *= 0.55;
  }
  field /= amp_sum;

  const double gamma = rng.uniform(0.7, 1.4);
  double lo[3], hi[3];
  for (int c = 0; c < 3; ++c) {
    lo[c] = rng.uniform(0.05, 0.5);
    hi[c] = rng.uniform(0.5, 0.95);
  }

  std::vector<Mat> planes(3, Mat(height, width));
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double l = std::pow(field(y, x), gamma);
      for (int c = 0; c < 3; ++c) planes[static_cast<size_t>(c)](y, x) = lo[c] + (hi[c] - lo[c]) * l;
    }

  // A few soft disks and rectangles give the image real edges.
  const int min_dim = std::min(width, height);
  const int shapes = 2 + static_cast<int>(rng.below(4));
  for (int s = 0; s < shapes; ++s) {
    const bool disk = rng.bernoulli(0.5);
    const double cx = rng.uniform(0.1, 0.9) * width;
    const double cy = rng.uniform(0.1, 0.9) * height;
    const double rx = rng.uniform(0.07, 0.28) * min_dim;
    const double ry = disk ? rx : rng.uniform(0.07, 0.28) * min_dim;
    const double edge = rng.uniform(1.5, 6.0);
    const double alpha = rng.uniform(0.35, 0.85);
    double color[3];
    for (int c = 0; c < 3; ++c) color[c] = rng.uniform(0.05, 0.95);

    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        // Signed distance to the shape boundary, negative inside.
        double dist;
        if (disk) {
          dist = std::hypot(x - cx, y - cy) - rx;
        } else {
          dist = std::max(std::abs(x - cx) - rx, std::abs(y - cy) - ry);
        }
        if (dist >= edge) continue;
        const double cover = dist <= -edge ? 1.0 : smoothstep((edge - dist) / (2.0 * edge));
        const double a = alpha * cover;
        for (int c = 0; c < 3; ++c) {
          auto& v = planes[static_cast<size_t>(c)](y, x);
          v = (1.0 - a) * v + a * color[c];
        }
      }
  }

  // Directional illumination gradient plus faint grain.
  const double phi = rng.uniform(0.0, 2.0 * M_PI);
  const double grad_amp = rng.uniform(0.05, 0.15);
  const double diag = std::hypot(width, height);
  ImageU8 out;
  out.width = width;
  out.height = height;
  out.rgb.resize(static_cast<size_t>(width) * height * 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double shade = grad_amp * 2.0 * ((x * std::cos(phi) + y * std::sin(phi)) / diag - 0.25);
      for (int c = 0; c < 3; ++c) {
        const double v = planes[static_cast<size_t>(c)](y, x) + shade + 0.015 * rng.normal();
        out.at(y, x, c) = static_cast<std::uint8_t>(
            std::clamp<long long>(std::llround(255.0 * std::clamp(v, 0.0, 1.0)), 0, 255));
      }
    }
  return out;
}

std::vector<std::string> write_corpus(const std::string& dir, int count, int size,
                                      std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("write_corpus: count must be >= 1");
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  paths.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "img_%03d.png", i);
    const std::string path = (std::filesystem::path(dir) / name).string();
    save_png(synth_image(size, size, derive_seed(seed, static_cast<std::uint64_t>(i))), path);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace asw
