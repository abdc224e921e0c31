#pragma once

#include <cmath>
#include <cstdint>

namespace asw {

/// Philox4x32-10 counter-based PRNG (Salmon et al., SC'11).
///
/// Every 128-bit block is a pure function of (seed, stream, counter), so any
/// draw can be reproduced independently of how many values were consumed
/// before it and results are identical across platforms. All randomness in
/// this project flows through this generator.
class Philox {
public:
  Philox(std::uint64_t seed, std::uint64_t stream = 0)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        ctr2_(static_cast<std::uint32_t>(stream)),
        ctr3_(static_cast<std::uint32_t>(stream >> 32)) {}

  struct Block {
    std::uint32_t x[4];
  };

  Block block(std::uint64_t counter) const {
    std::uint32_t c0 = static_cast<std::uint32_t>(counter);
    std::uint32_t c1 = static_cast<std::uint32_t>(counter >> 32);
    std::uint32_t c2 = ctr2_;
    std::uint32_t c3 = ctr3_;
    std::uint32_t k0 = key0_;
    std::uint32_t k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = kMul0 * static_cast<std::uint64_t>(c0);
      const std::uint64_t p1 = kMul1 * static_cast<std::uint64_t>(c2);
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n1 = lo1;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      const std::uint32_t n3 = lo0;
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    return Block{{c0, c1, c2, c3}};
  }

private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  std::uint32_t key0_, key1_, ctr2_, ctr3_;
};

/// Sequential double stream over a Philox instance.
///
/// Each 128-bit block yields two 53-bit uniforms; normals come from the
/// Box-Muller transform, consuming one block per pair. `uniform()` is in
/// [0, 1), `uniform_open()` in (0, 1].
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
      : gen_(seed, stream) {}

  double uniform() {
    std::uint64_t bits = next_u64();
    return static_cast<double>(bits >> 11) * kInv53;
  }

  double uniform_open() {
    std::uint64_t bits = next_u64();
    return (static_cast<double>(bits >> 11) + 1.0) * kInv53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

private:
  std::uint64_t next_u64() {
    if (phase_ == 0) {
      cached_ = gen_.block(counter_++);
      phase_ = 1;
      return (static_cast<std::uint64_t>(cached_.x[0]) << 32) | cached_.x[1];
    }
    phase_ = 0;
    return (static_cast<std::uint64_t>(cached_.x[2]) << 32) | cached_.x[3];
  }

  static constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53

  Philox gen_;
  Philox::Block cached_{};
  std::uint64_t counter_ = 0;
  int phase_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive sub-seeds from (seed, index) pairs.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // Asymmetric on purpose: a plain XOR of two mixed words makes
  // derive_seed(a, b) == derive_seed(b, a) and collapses the diagonal.
  return mix64(mix64(seed) + 0x9E3779B97F4A7C15ull * (index + 1));
}

}  // namespace asw
