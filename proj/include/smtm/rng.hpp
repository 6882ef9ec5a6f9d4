#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace smtm {

// SplitMix64 finalizer; used to derive well-separated seeds for parallel
// chains from one user seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for chain `index` of a family rooted at `base_seed`.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(base_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

// Sampler random source. The engine's output sequence is fixed by the
// standard; the conversions below are our own so that draws are identical
// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer on [0, n). Requires n > 0.
  std::size_t index(std::size_t n) {
    auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

  // Index drawn proportionally to `weights` (nonnegative, positive total)
  // with one uniform draw and a linear scan.
  std::size_t categorical(std::span<const double> weights, double total) {
    double target = uniform() * total;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (weights[k] <= 0.0) continue;
      last_positive = k;
      if (target < weights[k]) return k;
      target -= weights[k];
    }
    return last_positive;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace smtm
