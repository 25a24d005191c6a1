#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "hololink/rng.hpp"

using namespace hololink;

TEST_CASE("seed derivation separates purposes and coordinates") {
  const std::uint64_t master = 99;
  std::set<std::uint64_t> seen;
  for (const char* purpose : {"encoder", "agent-split", "hdc-keys", "rep"})
    for (std::uint64_t a = 0; a < 4; ++a)
      for (std::uint64_t b = 0; b < 4; ++b)
        CHECK(seen.insert(derive_seed(master, purpose, a, b)).second);
  CHECK(derive_seed(master, "encoder", 1, 2) == derive_seed(master, "encoder", 1, 2));
  CHECK(derive_seed(master, "encoder") != derive_seed(master + 1, "encoder"));
}

TEST_CASE("uniform stays in [0,1) and below() respects its bound") {
  Rng rng(17);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);

  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);  // ~4 sigma
}

TEST_CASE("gaussian moments are roughly standard") {
  Rng rng(23);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sum_sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sum_sq / n - 1.0) < 0.03);
}

TEST_CASE("shuffle permutes without losing elements") {
  Rng rng(31);
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i;
  auto shuffled = v;
  rng.shuffle(shuffled);
  CHECK(shuffled != v);
  std::sort(shuffled.begin(), shuffled.end());
  CHECK(shuffled == v);
}
