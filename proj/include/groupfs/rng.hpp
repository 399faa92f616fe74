#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "groupfs/mat.hpp"

namespace groupfs {

// Deterministic RNG with all distribution transforms pinned in this file, so
// results do not depend on the standard library's <random> distribution
// implementations. Every stochastic routine takes an explicit Rng&; nothing
// in the library touches hidden global state.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed), seed_mix_(seed) {}

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform in the open interval (0, 1).
  double uniform_open() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (one draw per call, no cache).
  double normal() {
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Standard Gumbel(0,1): -log(-log u).
  double gumbel() { return -std::log(-std::log(uniform_open())); }

  /// Unbiased integer in [0, n).
  uint64_t below(uint64_t n) {
    const uint64_t threshold = (-n) % n;
    uint64_t x;
    do {
      x = gen_();
    } while (x < threshold);
    return x % n;
  }

  /// Fisher-Yates permutation of {0..n-1}.
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(below(static_cast<uint64_t>(i) + 1));
      std::swap(p[i], p[j]);
    }
    return p;
  }

  Mat normal_mat(int rows, int cols, double stddev = 1.0) {
    Mat m(rows, cols);
    for (size_t k = 0; k < m.size(); ++k) m[k] = stddev * normal();
    return m;
  }

  Mat gumbel_mat(int rows, int cols) {
    Mat m(rows, cols);
    for (size_t k = 0; k < m.size(); ++k) m[k] = gumbel();
    return m;
  }

  /// Derived stream for parallel workers: a pure function of (construction
  /// seed, stream id), so sweep runs are independent and reproducible.
  Rng fork(uint64_t stream) const {
    uint64_t z = seed_mix_ + (stream + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

 private:
  std::mt19937_64 gen_;
  uint64_t seed_mix_ = 0;
};

}  // namespace groupfs
