#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "familia/error.hpp"
#include "familia/rng.hpp"

namespace familia {

// Walker/Vose alias table: O(n) construction, O(1) draws from a fixed
// discrete distribution. Weights need not be normalized.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(std::span<const double> weights) { build(weights); }

  void build(std::span<const double> weights) {
    const size_t n = weights.size();
    if (n == 0) throw Error("alias table: empty weight vector");
    double total = 0.0;
    for (double w : weights) {
      if (!std::isfinite(w) || w <= 0.0) {
        throw Error("alias table: weights must be positive and finite");
      }
      total += w;
    }
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);

    std::vector<double> scaled(n);
    for (size_t i = 0; i < n; ++i) scaled[i] = weights[i] * static_cast<double>(n) / total;

    std::vector<uint32_t> small, large;
    small.reserve(n);
    large.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const uint32_t s = small.back();
      small.pop_back();
      const uint32_t l = large.back();
      large.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    // Whatever remains has weight 1 up to rounding; its alias is never taken.
    while (!large.empty()) {
      prob_[large.back()] = 1.0;
      alias_[large.back()] = large.back();
      large.pop_back();
    }
    while (!small.empty()) {
      prob_[small.back()] = 1.0;
      alias_[small.back()] = small.back();
      small.pop_back();
    }
  }

  int32_t sample(Rng& rng) const {
    const uint32_t cell = rng.next_below(static_cast<uint32_t>(prob_.size()));
    return rng.next_double() < prob_[cell] ? static_cast<int32_t>(cell)
                                           : static_cast<int32_t>(alias_[cell]);
  }

  size_t size() const { return prob_.size(); }
  const std::vector<double>& prob() const { return prob_; }
  const std::vector<uint32_t>& alias() const { return alias_; }

 private:
  std::vector<double> prob_;
  std::vector<uint32_t> alias_;
};

}  // namespace familia
