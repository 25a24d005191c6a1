#include "hololink/hdc.hpp"

#include <cmath>
#include <numbers>

#include "hololink/common.hpp"
#include "hololink/rng.hpp"

namespace hololink {

namespace {

constexpr int kDirectPathLimit = 48;

std::vector<double> to_std(const Hypervector& v) {
  return {v.data(), v.data() + v.size()};
}

Hypervector from_std(const std::vector<double>& v) {
  return Eigen::Map<const Hypervector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void require_same_length(const Hypervector& x, const Hypervector& y) {
  if (x.size() != y.size())
    throw LengthMismatchError("hypervector lengths differ: " + std::to_string(x.size()) +
                              " vs " + std::to_string(y.size()));
}

void check_meta(const CompressedClassifier::Meta& meta) {
  if (meta.dimension !=
      compute_dimension(meta.hidden_size, meta.num_classes, meta.ratio))
    throw MetaMismatchError("dimension does not equal ceil(H*L/R)");
}

}  // namespace

int compute_dimension(int hidden_size, int num_classes, int ratio) {
  if (hidden_size < 1 || num_classes < 1 || ratio < 1)
    throw Error("compute_dimension needs positive H, L, R");
  const std::int64_t hl = static_cast<std::int64_t>(hidden_size) * num_classes;
  return static_cast<int>((hl + ratio - 1) / ratio);
}

Eigen::MatrixXd reshape_pad(const ClassifierMatrix& model, int ratio) {
  const int l = model.class_count();
  const int h = model.hidden_size();
  const int dim = compute_dimension(h, l, ratio);
  const std::int64_t hl = static_cast<std::int64_t>(h) * l;

  Eigen::MatrixXd stacked = Eigen::MatrixXd::Zero(dim, ratio);
  for (std::int64_t k = 0; k < hl; ++k) {
    const auto row = static_cast<Eigen::Index>(k / h);
    const auto col = static_cast<Eigen::Index>(k % h);
    stacked(static_cast<Eigen::Index>(k % dim), static_cast<Eigen::Index>(k / dim)) =
        model.weights(row, col);
  }
  return stacked;
}

ClassifierMatrix unreshape(const Eigen::MatrixXd& stacked, int hidden_size,
                           int num_classes, ClassifierKind kind) {
  const std::int64_t hl = static_cast<std::int64_t>(hidden_size) * num_classes;
  if (stacked.rows() * stacked.cols() < hl)
    throw ShapeMismatchError("stacked matrix too small for L x H result");

  ClassifierMatrix model;
  model.kind = kind;
  model.weights.resize(num_classes, hidden_size);
  const Eigen::Index dim = stacked.rows();
  for (std::int64_t k = 0; k < hl; ++k)
    model.weights(static_cast<Eigen::Index>(k / hidden_size),
                  static_cast<Eigen::Index>(k % hidden_size)) =
        stacked(static_cast<Eigen::Index>(k % dim), static_cast<Eigen::Index>(k / dim));
  return model;
}

Hypervector circular_convolve_direct(const Hypervector& x, const Hypervector& y) {
  require_same_length(x, y);
  const Eigen::Index dim = x.size();
  Hypervector z(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    double s = 0.0;
    for (Eigen::Index k = 0; k <= j; ++k) s += y[k] * x[j - k];
    for (Eigen::Index k = j + 1; k < dim; ++k) s += y[k] * x[j - k + dim];
    z[j] = s;
  }
  return z;
}

Hypervector circular_convolve_fft(const Hypervector& x, const Hypervector& y) {
  require_same_length(x, y);
  auto fx = fft::spectrum(to_std(x));
  const auto fy = fft::spectrum(to_std(y));
  for (std::size_t i = 0; i < fx.size(); ++i) fx[i] *= fy[i];
  return from_std(fft::real_inverse(fx));
}

Hypervector circular_convolve(const Hypervector& x, const Hypervector& y) {
  return x.size() <= kDirectPathLimit ? circular_convolve_direct(x, y)
                                      : circular_convolve_fft(x, y);
}

Hypervector involution(const Hypervector& x) {
  const Eigen::Index dim = x.size();
  Hypervector out(dim);
  out[0] = x[0];
  for (Eigen::Index j = 1; j < dim; ++j) out[j] = x[dim - j];
  return out;
}

KeySet derive_keys(std::uint64_t master_seed, std::uint32_t agent_id, int ratio,
                   int dimension, KeyMode mode) {
  if (ratio < 1 || dimension < 1) throw Error("derive_keys needs R >= 1 and D >= 1");

  KeySet set;
  set.master_seed = master_seed;
  set.agent_id = agent_id;
  set.mode = mode;
  set.keys.reserve(static_cast<std::size_t>(ratio));
  set.key_spectra.reserve(static_cast<std::size_t>(ratio));

  for (int r = 0; r < ratio; ++r) {
    Rng rng(derive_seed(master_seed, "holographic-key", agent_id, static_cast<std::uint64_t>(r)));
    Hypervector key(dimension);
    if (mode == KeyMode::Gaussian) {
      const double scale = 1.0 / std::sqrt(static_cast<double>(dimension));
      for (int j = 0; j < dimension; ++j) key[j] = scale * rng.gaussian();
    } else {
      // unit-magnitude spectrum with conjugate symmetry; real bins get a sign
      std::vector<fft::Complex> spec(static_cast<std::size_t>(dimension));
      spec[0] = {static_cast<double>(rng.sign()), 0.0};
      if (dimension % 2 == 0)
        spec[static_cast<std::size_t>(dimension / 2)] = {static_cast<double>(rng.sign()), 0.0};
      for (int j = 1; j < (dimension + 1) / 2; ++j) {
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        spec[static_cast<std::size_t>(j)] = {std::cos(phase), std::sin(phase)};
        spec[static_cast<std::size_t>(dimension - j)] =
            std::conj(spec[static_cast<std::size_t>(j)]);
      }
      key = from_std(fft::real_inverse(spec));
    }
    set.key_spectra.push_back(fft::spectrum(to_std(key)));
    set.keys.push_back(std::move(key));
  }
  return set;
}

CompressedClassifier compress(const ClassifierMatrix& model, const KeySet& keys) {
  const int l = model.class_count();
  const int h = model.hidden_size();
  const int dim = compute_dimension(h, l, keys.ratio());
  if (keys.dimension() != dim)
    throw KeyShapeMismatchError("key dimension " + std::to_string(keys.dimension()) +
                                " does not match ceil(H*L/R) = " + std::to_string(dim));

  const Eigen::MatrixXd stacked = reshape_pad(model, keys.ratio());

  // spectral accumulation of sum_i K_i (*) S_i; one inverse transform total
  std::vector<fft::Complex> acc(static_cast<std::size_t>(dim), fft::Complex{0.0, 0.0});
  for (int i = 0; i < keys.ratio(); ++i) {
    const auto fs = fft::spectrum(to_std(stacked.col(i)));
    const auto& fk = keys.key_spectra[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += fk[j] * fs[j];
  }

  CompressedClassifier payload;
  payload.w = from_std(fft::real_inverse(acc));
  payload.meta = {h, l, keys.ratio(), dim, keys.agent_id};
  return payload;
}

ClassifierMatrix decompress(const CompressedClassifier& payload, const KeySet& keys,
                            ClassifierKind kind) {
  check_meta(payload.meta);
  if (keys.ratio() != payload.meta.ratio || keys.dimension() != payload.meta.dimension ||
      keys.agent_id != payload.meta.agent_id)
    throw MetaMismatchError("key set does not match the payload derivation");

  const int dim = payload.meta.dimension;
  const auto fw = fft::spectrum(to_std(payload.w));

  // w (*) involution(K_i) has spectrum F(w) * conj(F(K_i))
  Eigen::MatrixXd stacked(dim, keys.ratio());
  std::vector<fft::Complex> prod(static_cast<std::size_t>(dim));
  for (int i = 0; i < keys.ratio(); ++i) {
    const auto& fk = keys.key_spectra[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < prod.size(); ++j) prod[j] = fw[j] * std::conj(fk[j]);
    stacked.col(i) = from_std(fft::real_inverse(prod));
  }
  return unreshape(stacked, payload.meta.hidden_size, payload.meta.num_classes, kind);
}

std::vector<std::uint8_t> serialize_compressed(const CompressedClassifier& payload) {
  check_meta(payload.meta);
  ByteWriter w;
  w.put_magic("HDCW");
  w.put_u16(1);
  w.put_u32(payload.meta.agent_id);
  w.put_u32(static_cast<std::uint32_t>(payload.meta.hidden_size));
  w.put_u32(static_cast<std::uint32_t>(payload.meta.num_classes));
  w.put_u32(static_cast<std::uint32_t>(payload.meta.ratio));
  w.put_u32(static_cast<std::uint32_t>(payload.meta.dimension));
  for (Eigen::Index j = 0; j < payload.w.size(); ++j) w.put_f64(payload.w[j]);
  return w.take();
}

CompressedClassifier deserialize_compressed(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  r.expect_magic("HDCW");
  if (r.get_u16() != 1) throw CorruptStreamError("unsupported payload version");

  CompressedClassifier payload;
  payload.meta.agent_id = r.get_u32();
  payload.meta.hidden_size = static_cast<int>(r.get_u32());
  payload.meta.num_classes = static_cast<int>(r.get_u32());
  payload.meta.ratio = static_cast<int>(r.get_u32());
  payload.meta.dimension = static_cast<int>(r.get_u32());
  check_meta(payload.meta);
  if (r.remaining() != static_cast<std::size_t>(payload.meta.dimension) * 8)
    throw CorruptStreamError("hypervector payload size mismatch");
  payload.w.resize(payload.meta.dimension);
  for (int j = 0; j < payload.meta.dimension; ++j) payload.w[j] = r.get_f64();
  return payload;
}

}  // namespace hololink
