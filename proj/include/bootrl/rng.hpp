#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace bootrl {

// SplitMix64 step. Used to derive independent stream seeds from a run seed
// plus structured keys (user index, variant, slot, ...).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

// Portable random stream: mt19937_64 bits with hand-written transforms, so
// draws do not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform double in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n) by rejection of the biased low range.
  std::size_t below(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = engine_();
      if (r >= threshold) return static_cast<std::size_t>(r % bound);
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Inverse-CDF draw over nonnegative weights summing to ~1. Rounding slack
  // falls onto the last index with positive weight.
  std::size_t categorical(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0.0) continue;
      acc += probs[i];
      last = i;
      if (u < acc) return i;
    }
    return last;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bootrl
