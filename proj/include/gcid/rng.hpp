#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gcid {

// splitmix64; used to derive independent sub-stream seeds from one mission
// seed so that environment, network and per-agent draws never interleave.
inline std::uint64_t mix_seed(std::uint64_t seed) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  return mix_seed(seed ^ mix_seed(salt));
}

// Deterministic random source.  The distributions are written out explicitly
// (not std::uniform_real_distribution etc.) so that identical seeds give
// identical streams on every standard library.
class Rng {
 public:
  Rng() : engine_(0) {}
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    return n == 0 ? 0 : engine_() % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller (one value per call, no cached state).
  double normal() {
    double a = uniform();
    while (a <= 0.0) a = uniform();
    const double b = uniform();
    return std::sqrt(-2.0 * std::log(a)) * std::cos(6.283185307179586 * b);
  }

  // Exponential with the given mean.
  double exponential(double mean) {
    double a = uniform();
    while (a <= 0.0) a = uniform();
    return -mean * std::log(a);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gcid
