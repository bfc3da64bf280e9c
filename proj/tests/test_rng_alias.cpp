#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "familia/alias_table.hpp"
#include "familia/rng.hpp"

using familia::AliasTable;
using familia::Rng;

TEST_CASE("rng streams are reproducible") {
  Rng a(123), b(123);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

  Rng c(124);
  bool differs = false;
  Rng a2(123);
  for (int i = 0; i < 10; ++i) differs |= (a2.next_u64() != c.next_u64());
  REQUIRE(differs);
}

TEST_CASE("rng helpers stay in range") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const uint32_t x = rng.next_below(13);
    REQUIRE(x < 13);
  }
}

TEST_CASE("derive_seed distinguishes streams") {
  REQUIRE(familia::derive_seed(42, 0) != familia::derive_seed(42, 1));
  REQUIRE(familia::derive_seed(42, 0) == familia::derive_seed(42, 0));
}

TEST_CASE("alias table rejects bad weights") {
  REQUIRE_THROWS_AS(AliasTable(std::vector<double>{}), familia::Error);
  REQUIRE_THROWS_AS(AliasTable(std::vector<double>{1.0, 0.0}), familia::Error);
  REQUIRE_THROWS_AS(AliasTable(std::vector<double>{1.0, -2.0}), familia::Error);
  REQUIRE_THROWS_AS(AliasTable(std::vector<double>{1.0, std::nan("")}), familia::Error);
  REQUIRE_THROWS_AS(
      AliasTable(std::vector<double>{1.0, std::numeric_limits<double>::infinity()}),
      familia::Error);
}

TEST_CASE("uniform weights leave every cell at probability one") {
  AliasTable table(std::vector<double>{2.5, 2.5, 2.5, 2.5});
  for (double p : table.prob()) REQUIRE(p == 1.0);
}

TEST_CASE("single-cell table always returns zero") {
  AliasTable table(std::vector<double>{3.0});
  Rng rng(1);
  for (int i = 0; i < 100; ++i) REQUIRE(table.sample(rng) == 0);
}

// Reconstructing the implied distribution from (prob, alias) must reproduce
// the normalized weights exactly: for every k,
//   w_k / sum = (prob[k] + sum_{j: alias[j]=k} (1 - prob[j])) / n.
static void check_table_exact(const std::vector<double>& weights) {
  AliasTable table(weights);
  const size_t n = weights.size();
  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<double> implied(n, 0.0);
  for (size_t j = 0; j < n; ++j) {
    implied[j] += table.prob()[j];
    implied[table.alias()[j]] += 1.0 - table.prob()[j];
  }
  for (size_t k = 0; k < n; ++k) {
    REQUIRE(implied[k] / static_cast<double>(n) ==
            Catch::Approx(weights[k] / total).margin(1e-12));
  }
}

TEST_CASE("alias construction reproduces weights exactly") {
  check_table_exact({1.0, 3.0});
  check_table_exact({5.0, 1.0, 1.0, 1.0, 2.0});
  check_table_exact({0.1, 0.2, 0.3, 0.4});

  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const size_t n = 2 + rng.next_below(40);
    std::vector<double> w(n);
    for (double& x : w) x = 1e-3 + rng.next_double() * 10.0;
    check_table_exact(w);
  }
}

TEST_CASE("empirical frequencies match [1,3] weights") {
  AliasTable table(std::vector<double>{1.0, 3.0});
  Rng rng(42);
  const int draws = 1000000;
  int count0 = 0;
  for (int i = 0; i < draws; ++i) {
    if (table.sample(rng) == 0) ++count0;
  }
  const double f0 = static_cast<double>(count0) / draws;
  REQUIRE(std::abs(f0 - 0.25) < 0.005);
  REQUIRE(std::abs((1.0 - f0) - 0.75) < 0.005);
}

TEST_CASE("empirical L1 gap below 0.01 for random weight multisets") {
  Rng meta(7);
  for (int trial = 0; trial < 5; ++trial) {
    const size_t n = 2 + meta.next_below(12);
    std::vector<double> w(n);
    double total = 0.0;
    for (double& x : w) {
      x = 0.05 + meta.next_double() * 5.0;
      total += x;
    }
    AliasTable table(w);
    Rng rng(1000 + trial);
    const int draws = 1000000;
    std::vector<int64_t> hits(n, 0);
    for (int i = 0; i < draws; ++i) hits[table.sample(rng)] += 1;
    double l1 = 0.0;
    for (size_t k = 0; k < n; ++k) {
      l1 += std::abs(static_cast<double>(hits[k]) / draws - w[k] / total);
    }
    REQUIRE(l1 < 0.01);
  }
}
