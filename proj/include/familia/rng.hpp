#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "familia/error.hpp"

namespace familia {

namespace detail {

inline uint64_t splitmix64_next(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t rotl64(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

// xoshiro256++ seeded through splitmix64. Used instead of <random> because the
// standard distributions are implementation-defined; this generator plus the
// helpers below give bit-identical streams on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64_next(sm);
  }

  uint64_t next_u64() {
    const uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound), bound > 0. Multiply-shift on the high bits.
  uint32_t next_below(uint32_t bound) {
    const uint32_t x = static_cast<uint32_t>(next_u64() >> 32);
    return static_cast<uint32_t>((static_cast<uint64_t>(x) * bound) >> 32);
  }

  // Standard normal via Box-Muller; keeps the spare between calls.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      const size_t j = next_below(static_cast<uint32_t>(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::array<uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Decorrelated sub-stream seed, e.g. one inference stream per document. The
// result depends only on (seed, stream), never on worker count or timing.
inline uint64_t derive_seed(uint64_t seed, uint64_t stream) {
  uint64_t x = seed;
  (void)detail::splitmix64_next(x);
  x += stream;
  return detail::splitmix64_next(x);
}

// Draw an index with probability proportional to weights; total must be the
// sum of the weights.
inline int32_t sample_discrete(std::span<const double> weights, double total, Rng& rng) {
  if (weights.empty()) throw Error("sample_discrete: empty weight vector");
  double u = rng.next_double() * total;
  for (size_t k = 0; k + 1 < weights.size(); ++k) {
    u -= weights[k];
    if (u <= 0.0) return static_cast<int32_t>(k);
  }
  return static_cast<int32_t>(weights.size()) - 1;
}

inline int32_t sample_discrete(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  return sample_discrete(weights, total, rng);
}

}  // namespace familia
