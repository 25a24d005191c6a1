#include "hololink/fft.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <unordered_map>

namespace hololink::fft {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Twiddle factors for a given power-of-two size, cached per thread.
const std::vector<Complex>& twiddles(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::vector<Complex>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<Complex> w(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    w[k] = {std::cos(ang), std::sin(ang)};
  }
  return cache.emplace(n, std::move(w)).first->second;
}

// Iterative Cooley-Tukey, forward direction, size must be a power of two.
void pow2_forward(std::vector<Complex>& a) {
  const std::size_t n = a.size();
  if (n < 2) return;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const auto& w = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        Complex u = a[i + k];
        Complex v = a[i + k + len / 2] * w[k * stride];
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

struct BluesteinPlan {
  std::size_t m = 0;            // power-of-two work size, >= 2n-1
  std::vector<Complex> chirp;   // exp(-i pi k^2 / n), length n
  std::vector<Complex> kernel;  // forward FFT of the wrapped conjugate chirp
};

const BluesteinPlan& bluestein_plan(std::size_t n) {
  thread_local std::unordered_map<std::size_t, BluesteinPlan> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  BluesteinPlan plan;
  plan.m = next_pow2(2 * n - 1);
  plan.chirp.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the trig argument small for large sizes
    std::uint64_t sq = (static_cast<std::uint64_t>(k) * k) % (2 * n);
    double ang = -std::numbers::pi * static_cast<double>(sq) / static_cast<double>(n);
    plan.chirp[k] = {std::cos(ang), std::sin(ang)};
  }
  std::vector<Complex> b(plan.m, Complex{0.0, 0.0});
  b[0] = std::conj(plan.chirp[0]);
  for (std::size_t k = 1; k < n; ++k) {
    b[k] = std::conj(plan.chirp[k]);
    b[plan.m - k] = b[k];
  }
  pow2_forward(b);
  plan.kernel = std::move(b);
  return cache.emplace(n, std::move(plan)).first->second;
}

// Forward DFT of arbitrary length via chirp-z: a linear convolution of the
// chirped input with the conjugate chirp, evaluated with power-of-two FFTs.
void bluestein_forward(std::vector<Complex>& a) {
  const std::size_t n = a.size();
  const BluesteinPlan& plan = bluestein_plan(n);

  std::vector<Complex> fa(plan.m, Complex{0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) fa[k] = a[k] * plan.chirp[k];
  pow2_forward(fa);
  for (std::size_t k = 0; k < plan.m; ++k) fa[k] *= plan.kernel[k];
  // inverse power-of-two FFT via conjugation
  for (auto& z : fa) z = std::conj(z);
  pow2_forward(fa);
  const double scale = 1.0 / static_cast<double>(plan.m);
  for (std::size_t j = 0; j < n; ++j) a[j] = std::conj(fa[j]) * scale * plan.chirp[j];
}

void forward(std::vector<Complex>& a) {
  if (a.size() < 2) return;
  if (is_pow2(a.size()))
    pow2_forward(a);
  else
    bluestein_forward(a);
}

}  // namespace

void transform(std::vector<Complex>& a, bool inverse) {
  if (!inverse) {
    forward(a);
    return;
  }
  for (auto& z : a) z = std::conj(z);
  forward(a);
  const double scale = 1.0 / static_cast<double>(a.empty() ? 1 : a.size());
  for (auto& z : a) z = std::conj(z) * scale;
}

std::vector<Complex> spectrum(const std::vector<double>& x) {
  std::vector<Complex> a(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = Complex{x[i], 0.0};
  transform(a, false);
  return a;
}

std::vector<double> real_inverse(const std::vector<Complex>& spec) {
  std::vector<Complex> a = spec;
  transform(a, true);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].real();
  return out;
}

}  // namespace hololink::fft
