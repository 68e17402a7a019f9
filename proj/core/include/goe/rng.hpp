#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace goe {

// Stream identifiers. Each stochastic component draws from its own stream so
// that swapping one agent's policy leaves every other draw untouched.
enum class Stream : std::uint64_t {
  source = 1,
  forward_channel = 2,
  backward_channel = 3,
  sa_policy = 4,
  aa_policy = 5,
  phase = 6,
  synthetic = 7,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Thin wrapper over mt19937_64 with platform-independent conversions
// (std::*_distribution output is implementation defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  Rng(std::uint64_t seed, Stream stream)
      : engine_(splitmix64(splitmix64(seed) ^ (static_cast<std::uint64_t>(stream) * 0xd1342543de82ef95ULL))) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Index drawn from a probability vector by inversion.
  std::size_t categorical(std::span<const double> pmf) {
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
      acc += pmf[i];
      if (u < acc) return i;
    }
    // Rounding left u above the accumulated mass: return the last supported index.
    for (std::size_t i = pmf.size(); i-- > 0;) {
      if (pmf[i] > 0.0) return i;
    }
    return pmf.size() - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace goe
