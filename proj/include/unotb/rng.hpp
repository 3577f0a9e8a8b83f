#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace unotb {

// Deterministic RNG used everywhere. The engine is std::mt19937_64 but the
// uniform/normal transforms are implemented here so that byte-identical
// streams do not depend on standard-library distribution internals.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Independent stream derived from (seed, tag). Distinct tags give
  // decorrelated streams for dataset sampling, init, batching, noise, ...
  Rng(uint64_t seed, std::string_view tag) : engine_(mix(seed, tag)) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; caches the second variate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Integer in [0, n).
  uint64_t below(uint64_t n) {
    // Rejection sampling over the top bits keeps this unbiased.
    const uint64_t limit = ~uint64_t{0} - ~uint64_t{0} % n;
    uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  static uint64_t mix(uint64_t seed, std::string_view tag) {
    // splitmix64 over the seed and a FNV-1a hash of the tag.
    uint64_t h = 14695981039346656037ull;
    for (const char c : tag) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    uint64_t z = seed + 0x9e3779b97f4a7c15ull + h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace unotb
