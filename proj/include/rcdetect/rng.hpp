#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace rcdetect {

// Deterministic, platform-independent random stream (splitmix64 core).
// std::* distributions are avoided on purpose: their algorithms are
// implementation-defined, which would break the byte-identical-output
// contract of seeded runs.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  // Derives an independent stream seed from (seed, a, b). Used to give each
  // device/tree/fold its own stream so work can be reordered or parallelized
  // without changing results.
  static uint64_t derive(uint64_t seed, uint64_t a, uint64_t b = 0) {
    uint64_t x = mix(seed + 0x9e3779b97f4a7c15ull * (a + 1));
    return mix(x + 0x9e3779b97f4a7c15ull * (b + 1));
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased uniform draw in [0, n). Lemire's multiply-shift rejection.
  uint64_t next_below(uint64_t n) {
    if (n == 0) return 0;
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<uint64_t>(m);
    if (lo < n) {
      uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        lo = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  // Box-Muller; always consumes exactly two uniforms.
  double normal(double mean, double stddev) {
    double u1 = 1.0 - next_double();
    double u2 = next_double();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + stddev * z;
  }

  // Exponential inter-arrival gap for a Poisson process of the given rate.
  double exponential(double rate) { return -std::log(1.0 - next_double()) / rate; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    shuffle(p);
    return p;
  }

 private:
  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint64_t state_;
};

}  // namespace rcdetect
