#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "hololink/fft.hpp"
#include "hololink/rng.hpp"

using hololink::Rng;
using hololink::fft::Complex;

namespace {

// quadratic reference DFT, independent of the transform under test
std::vector<Complex> dft_oracle(const std::vector<Complex>& x, bool inverse) {
  const std::size_t n = x.size();
  std::vector<Complex> out(n);
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t j = 0; j < n; ++j) {
    Complex acc{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
      const double ang = sign * 2.0 * std::numbers::pi *
                         static_cast<double>(j * k % n) / static_cast<double>(n);
      acc += x[k] * Complex{std::cos(ang), std::sin(ang)};
    }
    out[j] = inverse ? acc / static_cast<double>(n) : acc;
  }
  return out;
}

std::vector<Complex> random_signal(std::size_t n, Rng& rng) {
  std::vector<Complex> x(n);
  for (auto& v : x) v = {rng.gaussian(), rng.gaussian()};
  return x;
}

double max_abs_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST_CASE("transform matches the reference DFT on awkward sizes") {
  Rng rng(42);
  for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 17u, 60u, 64u, 97u, 100u, 257u, 1000u}) {
    auto x = random_signal(n, rng);
    auto expected = dft_oracle(x, false);
    auto actual = x;
    hololink::fft::transform(actual, false);
    CAPTURE(n);
    CHECK(max_abs_diff(actual, expected) < 1e-9 * (1.0 + static_cast<double>(n)));
  }
}

TEST_CASE("inverse transform inverts the forward one") {
  Rng rng(7);
  for (std::size_t n : {2u, 9u, 64u, 243u, 1000u, 2143u}) {
    const auto x = random_signal(n, rng);
    auto y = x;
    hololink::fft::transform(y, false);
    hololink::fft::transform(y, true);
    CAPTURE(n);
    CHECK(max_abs_diff(y, x) < 1e-10);
  }
}

TEST_CASE("real spectrum has conjugate symmetry and inverts to the signal") {
  Rng rng(3);
  std::vector<double> x(101);
  for (auto& v : x) v = rng.gaussian();

  const auto spec = hololink::fft::spectrum(x);
  REQUIRE(spec.size() == x.size());
  for (std::size_t j = 1; j < x.size(); ++j)
    CHECK(std::abs(spec[j] - std::conj(spec[x.size() - j])) < 1e-10);

  const auto back = hololink::fft::real_inverse(spec);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("transform of a constant is an impulse") {
  std::vector<Complex> x(16, Complex{1.0, 0.0});
  hololink::fft::transform(x, false);
  CHECK(std::abs(x[0] - Complex{16.0, 0.0}) < 1e-12);
  for (std::size_t j = 1; j < x.size(); ++j) CHECK(std::abs(x[j]) < 1e-12);
}
