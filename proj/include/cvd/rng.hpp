#pragma once

#include <cstdint>
#include <string>

#include "cvd/common.hpp"

namespace cvd {

// splitmix64; used both as a generator seeder and for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive an independent child seed from (parent seed, role tag).
/// The tag is folded in FNV-1a style so every named stream is reproducible
/// on its own.
inline std::uint64_t derive_seed(std::uint64_t parent, const std::string& tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t s = parent ^ h;
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

/// Deterministic RNG with hand-rolled distributions so that streams are
/// bit-reproducible for a fixed seed independent of the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed), have_spare_(false) {
    // warm up so that near-zero seeds decorrelate quickly
    splitmix64(state_);
    splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller (cached spare).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform direction on S^{D-1}.
  Vec unit_vector(int dim) {
    Vec v(dim);
    double n = 0.0;
    do {
      for (int i = 0; i < dim; ++i) v[i] = normal();
      n = v.norm();
    } while (n < 1e-12);
    return v / n;
  }

 private:
  std::uint64_t state_;
  bool have_spare_;
  double spare_ = 0.0;
};

}  // namespace cvd
