#pragma once

#include <complex>
#include <vector>

namespace hololink::fft {

using Complex = std::complex<double>;

// In-place DFT of arbitrary length (radix-2 for powers of two, Bluestein
// otherwise). The inverse transform includes the 1/N factor, so
// transform(transform(a, false), true) == a up to rounding.
void transform(std::vector<Complex>& a, bool inverse);

// Full complex spectrum of a real signal.
std::vector<Complex> spectrum(const std::vector<double>& x);

// Inverse transform of a spectrum, keeping the real part.
std::vector<double> real_inverse(const std::vector<Complex>& spec);

}  // namespace hololink::fft
