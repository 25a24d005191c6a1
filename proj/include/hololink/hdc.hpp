#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "hololink/fft.hpp"
#include "hololink/rvfl.hpp"

namespace hololink {

// Real-valued D-dimensional carrier of a compressed classifier.
using Hypervector = Eigen::VectorXd;

// Unitary keys have all Fourier magnitudes equal to one, which makes the
// index-reversal involution their exact convolutional inverse; Gaussian keys
// (entries N(0, 1/D)) make it an approximate inverse only.
enum class KeyMode : std::uint8_t { Unitary = 0, Gaussian = 1 };

// Per-agent key hypervectors, regenerated deterministically by every receiver
// from (master_seed, agent_id), so no key material is ever transmitted.
struct KeySet {
  std::vector<Hypervector> keys;
  std::vector<std::vector<fft::Complex>> key_spectra;  // cached transforms
  std::uint64_t master_seed = 0;
  std::uint32_t agent_id = 0;
  KeyMode mode = KeyMode::Unitary;

  int ratio() const { return static_cast<int>(keys.size()); }
  int dimension() const { return keys.empty() ? 0 : static_cast<int>(keys.front().size()); }
};

struct CompressedClassifier {
  struct Meta {
    int hidden_size = 0;
    int num_classes = 0;
    int ratio = 0;
    int dimension = 0;
    std::uint32_t agent_id = 0;
  };
  Hypervector w;
  Meta meta;
};

// D = ceil(H * L / R)
int compute_dimension(int hidden_size, int num_classes, int ratio);

// Flattens the L x H matrix row-major, zero-pads to D * R values and fills a
// D x R matrix column by column. unreshape drops the padding again; the pair
// is an exact inverse.
Eigen::MatrixXd reshape_pad(const ClassifierMatrix& model, int ratio);
ClassifierMatrix unreshape(const Eigen::MatrixXd& stacked, int hidden_size,
                           int num_classes, ClassifierKind kind);

// z_j = sum_k y_k x_{(j-k) mod D}. The default entry point picks the direct
// summation for short vectors and the transform path otherwise; both are
// exposed so they can be checked against each other.
Hypervector circular_convolve(const Hypervector& x, const Hypervector& y);
Hypervector circular_convolve_direct(const Hypervector& x, const Hypervector& y);
Hypervector circular_convolve_fft(const Hypervector& x, const Hypervector& y);

// out_j = x_{(-j) mod D}
Hypervector involution(const Hypervector& x);

KeySet derive_keys(std::uint64_t master_seed, std::uint32_t agent_id, int ratio,
                   int dimension, KeyMode mode = KeyMode::Unitary);

// w = sum_i K_i (*) S_i where S_i is the i-th column of reshape_pad(model, R).
CompressedClassifier compress(const ClassifierMatrix& model, const KeySet& keys);

// s_i ~= w (*) involution(K_i) per column, then unreshape. Exact for R=1 with
// unitary keys; otherwise the other columns' crosstalk remains.
ClassifierMatrix decompress(const CompressedClassifier& payload, const KeySet& keys,
                            ClassifierKind kind);

// Little-endian wire format: "HDCW", version u16, agent_id u32, H u32, L u32,
// R u32, D u32, then D doubles.
std::vector<std::uint8_t> serialize_compressed(const CompressedClassifier& payload);
CompressedClassifier deserialize_compressed(const std::vector<std::uint8_t>& bytes);

}  // namespace hololink
