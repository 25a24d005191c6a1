#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "hololink/common.hpp"
#include "hololink/hdc.hpp"
#include "hololink/rng.hpp"

using namespace hololink;

namespace {

Hypervector random_hv(int dim, Rng& rng) {
  Hypervector v(dim);
  for (int j = 0; j < dim; ++j) v[j] = rng.gaussian();
  return v;
}

Hypervector delta(int dim) {
  Hypervector v = Hypervector::Zero(dim);
  v[0] = 1.0;
  return v;
}

ClassifierMatrix random_model(int classes, int hidden, Rng& rng) {
  ClassifierMatrix m;
  m.kind = ClassifierKind::Rls;
  m.weights.resize(classes, hidden);
  for (int i = 0; i < classes; ++i)
    for (int j = 0; j < hidden; ++j) m.weights(i, j) = rng.gaussian();
  return m;
}

double rel_err(const Hypervector& a, const Hypervector& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

}  // namespace

TEST_CASE("compute_dimension is the ceiling of HL/R") {
  CHECK(compute_dimension(1500, 10, 7) == 2143);
  CHECK(compute_dimension(20, 5, 1) == 100);
  CHECK(compute_dimension(2, 3, 4) == 2);
  CHECK_THROWS_AS(compute_dimension(0, 3, 4), Error);
}

TEST_CASE("reshape stacks columns of D values with tail padding") {
  ClassifierMatrix m;
  m.weights.resize(2, 3);  // L=2, H=3, row-major flatten = 1..6
  m.weights << 1, 2, 3, 4, 5, 6;

  SUBCASE("exact fit") {
    const auto s = reshape_pad(m, 2);  // D = 3
    REQUIRE(s.rows() == 3);
    REQUIRE(s.cols() == 2);
    CHECK(s(0, 0) == 1);
    CHECK(s(2, 0) == 3);
    CHECK(s(0, 1) == 4);
    CHECK(s(2, 1) == 6);
  }
  SUBCASE("padding fills the tail with zeros") {
    ClassifierMatrix m5;
    m5.weights.resize(1, 5);
    m5.weights << 1, 2, 3, 4, 5;
    const auto s = reshape_pad(m5, 2);  // D = 3, one padded cell
    REQUIRE(s.rows() == 3);
    CHECK(s(1, 1) == 5);
    CHECK(s(2, 1) == 0.0);
  }
}

TEST_CASE("unreshape inverts reshape exactly for random shapes") {
  Rng rng(92);
  for (int trial = 0; trial < 30; ++trial) {
    const int classes = 1 + static_cast<int>(rng.below(6));
    const int hidden = 1 + static_cast<int>(rng.below(40));
    const int ratio = 1 + static_cast<int>(rng.below(12));
    const auto m = random_model(classes, hidden, rng);
    const auto back = unreshape(reshape_pad(m, ratio), hidden, classes, m.kind);
    CHECK(back.weights == m.weights);
  }
}

TEST_CASE("circular convolution on frozen oracle values") {
  Hypervector x(3), shift(3), y(3);
  x << 1, 2, 3;
  shift << 0, 1, 0;
  y << 4, 5, 6;

  // identity element
  CHECK(circular_convolve_direct(x, delta(3)) == x);
  CHECK(rel_err(circular_convolve_fft(x, delta(3)), x) < 1e-12);

  // cyclic shift
  Hypervector shifted(3);
  shifted << 3, 1, 2;
  CHECK(circular_convolve_direct(x, shift) == shifted);
  CHECK(rel_err(circular_convolve_fft(x, shift), shifted) < 1e-12);

  // dense case, z_j = sum_k y_k x_{(j-k) mod D}
  Hypervector dense(3);
  dense << 31, 31, 28;
  CHECK(circular_convolve_direct(x, y) == dense);
  CHECK(rel_err(circular_convolve_fft(x, y), dense) < 1e-12);

  Hypervector longer(4);
  CHECK_THROWS_AS(circular_convolve(x, longer), LengthMismatchError);
}

TEST_CASE("transform path agrees with direct summation across sizes") {
  Rng rng(55);
  for (int dim : {1, 2, 3, 17, 64, 100, 257, 1000, 2143, 16384}) {
    const auto x = random_hv(dim, rng);
    const auto y = random_hv(dim, rng);
    const auto direct = circular_convolve_direct(x, y);
    const auto fast = circular_convolve_fft(x, y);
    CAPTURE(dim);
    CHECK(rel_err(fast, direct) < 1e-9);
  }
}

TEST_CASE("convolution is commutative, bilinear and associative") {
  Rng rng(66);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 2 + static_cast<int>(rng.below(300));
    const auto x = random_hv(dim, rng);
    const auto y = random_hv(dim, rng);
    const auto z = random_hv(dim, rng);
    const double a = rng.gaussian(), b = rng.gaussian();

    CHECK(rel_err(circular_convolve(x, y), circular_convolve(y, x)) < 1e-9);

    const Hypervector lin1 = circular_convolve(a * x + b * y, z);
    const Hypervector lin2 =
        a * circular_convolve(x, z) + b * circular_convolve(y, z);
    CHECK((lin1 - lin2).norm() < 1e-9 * (1.0 + lin2.norm()));

    const Hypervector assoc1 = circular_convolve(circular_convolve(x, y), z);
    const Hypervector assoc2 = circular_convolve(x, circular_convolve(y, z));
    CHECK((assoc1 - assoc2).norm() < 1e-9 * (1.0 + assoc2.norm()));
  }
}

TEST_CASE("involution reverses indices and is its own inverse") {
  Hypervector v(3);
  v << 10, 20, 30;
  Hypervector expected(3);
  expected << 10, 30, 20;
  CHECK(involution(v) == expected);
  CHECK(involution(involution(v)) == v);
  CHECK(involution(delta(5)) == delta(5));
}

TEST_CASE("derived keys are unitary and deterministic") {
  const KeySet keys = derive_keys(1234, 3, 4, 97);
  REQUIRE(keys.ratio() == 4);
  REQUIRE(keys.dimension() == 97);

  for (const auto& k : keys.keys) {
    // transform oracle: every Fourier magnitude is 1
    const auto spec = fft::spectrum({k.data(), k.data() + k.size()});
    for (const auto& c : spec) CHECK(std::abs(std::abs(c) - 1.0) < 1e-9);

    // the involution is the exact convolutional inverse
    const Hypervector unit = circular_convolve(k, involution(k));
    CHECK((unit - delta(97)).cwiseAbs().maxCoeff() < 1e-9);
  }

  const KeySet again = derive_keys(1234, 3, 4, 97);
  for (int i = 0; i < 4; ++i) CHECK(keys.keys[i] == again.keys[i]);
  const KeySet other = derive_keys(1234, 4, 4, 97);
  CHECK_FALSE(keys.keys[0] == other.keys[0]);
}

TEST_CASE("gaussian keys have approximately inverse involutions") {
  const KeySet keys = derive_keys(77, 0, 1, 512, KeyMode::Gaussian);
  const Hypervector unit = circular_convolve(keys.keys[0], involution(keys.keys[0]));
  CHECK(unit[0] == doctest::Approx(1.0).epsilon(0.35));
  double off = 0.0;
  for (int j = 1; j < 512; ++j) off = std::max(off, std::abs(unit[j]));
  CHECK(off < 0.5);  // noisy but bounded, nothing like the exact case
}

TEST_CASE("compression is linear and single-pair compression is a plain binding") {
  Rng rng(11);
  const auto model = random_model(2, 5, rng);
  const KeySet keys = derive_keys(5, 0, 1, 10);

  const auto payload = compress(model, keys);
  CHECK(payload.meta.dimension == 10);
  CHECK(payload.meta.ratio == 1);

  Eigen::VectorXd flat(10);
  for (int k = 0; k < 10; ++k) flat[k] = model.weights(k / 5, k % 5);
  CHECK(rel_err(payload.w, circular_convolve(keys.keys[0], flat)) < 1e-12);

  // zero in, zero out
  ClassifierMatrix zero{Eigen::MatrixXd::Zero(2, 5), ClassifierKind::Rls};
  CHECK(compress(zero, keys).w.norm() == 0.0);

  // scaling commutes with compression
  ClassifierMatrix scaled = model;
  scaled.weights *= -3.5;
  const auto sp = compress(scaled, keys);
  CHECK((sp.w + 3.5 * payload.w).norm() < 1e-12 * payload.w.norm());
}

TEST_CASE("compress validates key shape") {
  Rng rng(14);
  const auto model = random_model(2, 5, rng);
  const KeySet wrong = derive_keys(5, 0, 2, 10);  // D should be 5 for R=2
  CHECK_THROWS_AS(compress(model, wrong), KeyShapeMismatchError);
}

TEST_CASE("compression round trip is exact for a single key-value pair") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int classes = 1 + static_cast<int>(rng.below(8));
    const int hidden = 1 + static_cast<int>(rng.below(50));
    const auto model = random_model(classes, hidden, rng);
    const KeySet keys = derive_keys(900 + trial, 0, 1, classes * hidden);
    const auto back = decompress(compress(model, keys), keys, model.kind);
    CHECK((back.weights - model.weights).norm() <= 1e-10 * model.weights.norm());
  }
}

TEST_CASE("decompress matches the literal convolve-with-involution composition") {
  Rng rng(101);
  const int classes = 3, hidden = 20, ratio = 4;
  const auto model = random_model(classes, hidden, rng);
  const int dim = compute_dimension(hidden, classes, ratio);
  const KeySet keys = derive_keys(31, 2, ratio, dim);
  const auto payload = compress(model, keys);

  // oracle path: literal per-column operations
  Eigen::MatrixXd stacked(dim, ratio);
  for (int i = 0; i < ratio; ++i)
    stacked.col(i) = circular_convolve(payload.w, involution(keys.keys[i]));
  const auto expected = unreshape(stacked, hidden, classes, model.kind);

  const auto actual = decompress(payload, keys, model.kind);
  CHECK((actual.weights - expected.weights).norm() <=
        1e-12 * (1.0 + expected.weights.norm()));
}

TEST_CASE("decompressing a zero payload gives a zero matrix") {
  const KeySet keys = derive_keys(4, 1, 3, 7);
  CompressedClassifier payload;
  payload.w = Hypervector::Zero(7);
  payload.meta = {7, 3, 3, 7, 1};
  CHECK(decompress(payload, keys, ClassifierKind::Rls).weights.norm() == 0.0);
}

TEST_CASE("decompress rejects mismatched key sets") {
  Rng rng(3);
  const auto model = random_model(2, 6, rng);
  const KeySet keys = derive_keys(1, 0, 2, 6);
  const auto payload = compress(model, keys);

  const KeySet other_agent = derive_keys(1, 1, 2, 6);
  CHECK_THROWS_AS(decompress(payload, other_agent, model.kind), MetaMismatchError);
  const KeySet other_ratio = derive_keys(1, 0, 3, 4);
  CHECK_THROWS_AS(decompress(payload, other_ratio, model.kind), MetaMismatchError);
}

TEST_CASE("crosstalk error equals the other column's norm for unitary keys") {
  // R=2: the reconstruction of column 1 is S1 plus a unitary transform of S2,
  // so the squared error is exactly |S2|^2; the Monte-Carlo mean must sit
  // within a tight band around 1 for unit-norm S2.
  Rng rng(2718);
  const int dim = 200;
  double total_sq_err = 0.0;
  const int trials = 30;
  for (int t = 0; t < trials; ++t) {
    Eigen::MatrixXd stacked(dim, 2);
    stacked.col(0) = random_hv(dim, rng).normalized();
    stacked.col(1) = random_hv(dim, rng).normalized();

    const KeySet keys = derive_keys(5000 + t, 0, 2, dim);
    Hypervector w = circular_convolve(keys.keys[0], stacked.col(0)) +
                    circular_convolve(keys.keys[1], stacked.col(1));
    const Hypervector rec = circular_convolve(w, involution(keys.keys[0]));
    total_sq_err += (rec - stacked.col(0)).squaredNorm();
  }
  CHECK(total_sq_err / trials == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("crosstalk decomposition identity") {
  Rng rng(31415);
  const int dim = 64, ratio = 3;
  Eigen::MatrixXd stacked(dim, ratio);
  for (int i = 0; i < ratio; ++i) stacked.col(i) = random_hv(dim, rng);
  const KeySet keys = derive_keys(17, 0, ratio, dim);

  Hypervector w = Hypervector::Zero(dim);
  for (int i = 0; i < ratio; ++i)
    w += circular_convolve(keys.keys[i], stacked.col(i));

  for (int i = 0; i < ratio; ++i) {
    const Hypervector rec = circular_convolve(w, involution(keys.keys[i]));
    Hypervector crosstalk = Hypervector::Zero(dim);
    for (int j = 0; j < ratio; ++j) {
      if (j == i) continue;
      crosstalk += circular_convolve(
          involution(keys.keys[i]),
          circular_convolve(keys.keys[j], stacked.col(j)));
    }
    CHECK((rec - stacked.col(i) - crosstalk).norm() < 1e-9 * (1.0 + rec.norm()));
  }
}

TEST_CASE("payload wire format round-trips and rejects junk") {
  Rng rng(12);
  const auto model = random_model(3, 7, rng);
  const KeySet keys = derive_keys(2, 9, 2, 11);
  const auto payload = compress(model, keys);

  const auto bytes = serialize_compressed(payload);
  CHECK(bytes.size() == 26 + 11 * 8);
  const auto back = deserialize_compressed(bytes);
  CHECK(back.meta.agent_id == 9);
  CHECK(back.meta.ratio == 2);
  CHECK(back.w == payload.w);

  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(deserialize_compressed(truncated), CorruptStreamError);

  auto inconsistent = bytes;
  inconsistent[14] = 99;  // L field no longer matches D
  CHECK_THROWS_AS(deserialize_compressed(inconsistent), MetaMismatchError);
}
