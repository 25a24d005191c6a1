#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace hololink {

// splitmix64 step; used both as a seed mixer and inside seed derivation.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministically derives an independent stream seed from a master seed,
// a purpose tag and up to two integer coordinates (agent id, repetition, ...).
// Every random choice in the project draws from a seed produced here, so a
// whole experiment is a pure function of its master seed. Each absorbed word
// passes through the full splitmix64 avalanche.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = master ^ 0x517cc1b727220a95ULL;
  auto absorb = [&h](std::uint64_t v) {
    h ^= v;
    std::uint64_t state = h;
    h = splitmix64(state);
  };
  absorb(purpose.size());
  for (char c : purpose) absorb(static_cast<unsigned char>(c));
  absorb(a + 0x2545f4914f6cdd1dULL);
  absorb(b + 0x6a09e667f3bcc909ULL);
  return h;
}

// Small deterministic generator (xoshiro256**). All distributions below are
// implemented by hand so results do not depend on the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // exactly uniform integer in [0, n), n >= 1 (rejection sampling)
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // +1 or -1 with equal probability
  int sign() { return (next_u64() >> 63) ? 1 : -1; }

  // standard normal via Marsaglia polar method
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  // Fisher-Yates
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace hololink
