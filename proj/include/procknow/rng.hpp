#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace procknow {

// Deterministic PRNG (splitmix64). Every stochastic operation in the library
// draws from one of these so that identical seeds reproduce identical bytes
// regardless of platform or standard-library version.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection keeps the draw unbiased.
  std::uint64_t below(std::uint64_t n) {
    assert(n > 0);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  bool coin() { return (next_u64() & 1u) != 0; }

  // Independent substream; does not advance this generator.
  Rng fork(std::uint64_t salt) const {
    Rng r(state_ ^ (0xD1B54A32D192ED03ULL * (salt + 1)));
    r.next_u64();
    return r;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

private:
  std::uint64_t state_;
};

}  // namespace procknow
