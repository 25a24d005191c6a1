#include "hololink/rvfl.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "hololink/common.hpp"
#include "hololink/rng.hpp"

namespace hololink {

const char* to_string(ClassifierKind kind) {
  return kind == ClassifierKind::Rls ? "rls" : "centroid";
}

Eigen::MatrixXi make_feature_keys(int d, int hidden_size, std::uint64_t seed) {
  if (d < 1 || hidden_size < 1) throw Error("feature keys need d >= 1 and H >= 1");
  Rng rng(seed);
  Eigen::MatrixXi keys(d, hidden_size);
  for (int j = 0; j < hidden_size; ++j)
    for (int i = 0; i < d; ++i) keys(i, j) = rng.sign();
  return keys;
}

EncoderConfig make_encoder(int d, int hidden_size, int kappa, std::uint64_t seed) {
  if (kappa < 1) throw Error("kappa must be a positive integer");
  EncoderConfig cfg;
  cfg.hidden_size = hidden_size;
  cfg.kappa = kappa;
  cfg.seed = seed;
  cfg.feature_keys = make_feature_keys(d, hidden_size, seed);
  return cfg;
}

namespace {

int thermometer_level(double x, int hidden_size) {
  if (!(x >= 0.0 && x <= 1.0))
    throw OutOfRangeError("thermometer input " + std::to_string(x) + " outside [0, 1]");
  // round half up
  return static_cast<int>(std::floor(x * hidden_size + 0.5));
}

}  // namespace

Eigen::VectorXi thermometer_encode(double x, int hidden_size) {
  const int level = thermometer_level(x, hidden_size);
  Eigen::VectorXi code(hidden_size);
  for (int j = 0; j < hidden_size; ++j) code[j] = j < level ? 1 : -1;
  return code;
}

Eigen::VectorXi hidden_activations(const Eigen::VectorXd& x, const EncoderConfig& cfg) {
  const int d = cfg.feature_count();
  const int h = cfg.hidden_size;
  if (x.size() != d) throw Error("feature vector length does not match encoder keys");

  std::vector<int> level(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) level[static_cast<std::size_t>(i)] = thermometer_level(x[i], h);

  Eigen::VectorXi out(h);
  for (int j = 0; j < h; ++j) {
    int s = 0;
    for (int i = 0; i < d; ++i) {
      const int k = cfg.feature_keys(i, j);
      s += (j < level[static_cast<std::size_t>(i)]) ? k : -k;
    }
    out[j] = std::clamp(s, -cfg.kappa, cfg.kappa);
  }
  return out;
}

Eigen::MatrixXi encode_rows_raw(const Dataset& ds, std::span<const int> rows,
                                const Eigen::MatrixXi& feature_keys) {
  const int d = static_cast<int>(feature_keys.rows());
  const int h = static_cast<int>(feature_keys.cols());
  if (ds.feature_count() != d) throw Error("dataset width does not match encoder keys");

  Eigen::MatrixXi raw(static_cast<Eigen::Index>(rows.size()), h);
  std::vector<int> level(static_cast<std::size_t>(d));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int i = 0; i < d; ++i)
      level[static_cast<std::size_t>(i)] = thermometer_level(ds.features(rows[r], i), h);
    for (int j = 0; j < h; ++j) {
      int s = 0;
      for (int i = 0; i < d; ++i) {
        const int k = feature_keys(i, j);
        s += (j < level[static_cast<std::size_t>(i)]) ? k : -k;
      }
      raw(static_cast<Eigen::Index>(r), j) = s;
    }
  }
  return raw;
}

HiddenBatch clip_activations(const Eigen::MatrixXi& raw_sums, int kappa) {
  return raw_sums.unaryExpr([kappa](int v) { return std::clamp(v, -kappa, kappa); });
}

HiddenBatch encode_rows(const Dataset& ds, std::span<const int> rows,
                        const EncoderConfig& cfg) {
  return clip_activations(encode_rows_raw(ds, rows, cfg.feature_keys), cfg.kappa);
}

std::vector<int> gather_labels(const Dataset& ds, std::span<const int> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (int r : rows) out.push_back(ds.labels[static_cast<std::size_t>(r)]);
  return out;
}

ClassifierMatrix train_rls(const HiddenBatch& activations, std::span<const int> labels,
                           int num_classes, double lambda) {
  const Eigen::Index n = activations.rows();
  const Eigen::Index h = activations.cols();
  if (n < 1 || static_cast<std::size_t>(n) != labels.size())
    throw Error("activation rows and labels must align");
  if (!(lambda > 0.0)) throw Error("lambda must be positive");

  const Eigen::MatrixXd hd = activations.cast<double>();
  Eigen::MatrixXd gram = hd.transpose() * hd;
  gram.diagonal().array() += lambda;

  // right-hand side H^T Y without materializing the one-hot matrix
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(h, num_classes);
  for (Eigen::Index i = 0; i < n; ++i)
    rhs.col(labels[static_cast<std::size_t>(i)]) += hd.row(i).transpose();

  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw NumericalFailureError("Cholesky factorization failed (non-finite activations?)");

  ClassifierMatrix model;
  model.kind = ClassifierKind::Rls;
  model.weights = llt.solve(rhs).transpose();
  if (!model.weights.allFinite())
    throw NumericalFailureError("ridge solve produced non-finite weights");
  return model;
}

ClassifierMatrix train_centroids(const HiddenBatch& activations,
                                 std::span<const int> labels, int num_classes,
                                 bool* empty_class_seen) {
  const Eigen::Index n = activations.rows();
  if (n < 1 || static_cast<std::size_t>(n) != labels.size())
    throw Error("activation rows and labels must align");

  ClassifierMatrix model;
  model.kind = ClassifierKind::Centroid;
  model.weights = Eigen::MatrixXd::Zero(num_classes, activations.cols());
  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    model.weights.row(c) += activations.row(i).cast<double>();
    ++counts[static_cast<std::size_t>(c)];
  }
  if (empty_class_seen) *empty_class_seen = false;
  for (int c = 0; c < num_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      if (empty_class_seen) *empty_class_seen = true;
      continue;  // zero row stays
    }
    model.weights.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  }
  return model;
}

int predict(const ClassifierMatrix& model, const Eigen::VectorXd& hidden) {
  const int num_classes = model.class_count();
  if (hidden.size() != model.weights.cols())
    throw ShapeMismatchError("hidden vector length does not match classifier");

  int best = 0;
  double best_score = 0.0;
  if (model.kind == ClassifierKind::Rls) {
    const Eigen::VectorXd scores = model.weights * hidden;
    best_score = scores[0];
    for (int c = 1; c < num_classes; ++c)
      if (scores[c] > best_score) {
        best_score = scores[c];
        best = c;
      }
  } else {
    const double hnorm = hidden.norm();
    for (int c = 0; c < num_classes; ++c) {
      const double wnorm = model.weights.row(c).norm();
      const double denom = wnorm * hnorm;
      const double score = denom == 0.0 ? 0.0 : model.weights.row(c).dot(hidden) / denom;
      if (c == 0 || score > best_score) {
        best_score = score;
        best = c;
      }
    }
  }
  return best;
}

int predict(const ClassifierMatrix& model, const Eigen::VectorXi& hidden) {
  return predict(model, Eigen::VectorXd(hidden.cast<double>()));
}

double evaluate_batch(const ClassifierMatrix& model, const HiddenBatch& activations,
                      std::span<const int> labels) {
  const Eigen::Index n = activations.rows();
  if (n == 0) throw EmptyTestSetError("no samples to evaluate");
  if (static_cast<std::size_t>(n) != labels.size())
    throw Error("activation rows and labels must align");
  int correct = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd h = activations.row(i).transpose().cast<double>();
    if (predict(model, h) == labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

double evaluate(const ClassifierMatrix& model, const EncoderConfig& cfg,
                const Dataset& ds) {
  if (ds.test_indices.empty()) throw EmptyTestSetError("dataset has no test split");
  const HiddenBatch acts = encode_rows(ds, ds.test_indices, cfg);
  const std::vector<int> labels = gather_labels(ds, ds.test_indices);
  return evaluate_batch(model, acts, labels);
}

std::vector<std::uint8_t> serialize_model(const ClassifierMatrix& model) {
  ByteWriter w;
  w.put_magic("RVFL");
  w.put_u16(1);
  w.put_u8(static_cast<std::uint8_t>(model.kind));
  w.put_u32(static_cast<std::uint32_t>(model.weights.rows()));
  w.put_u32(static_cast<std::uint32_t>(model.weights.cols()));
  for (Eigen::Index r = 0; r < model.weights.rows(); ++r)
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c) w.put_f64(model.weights(r, c));
  return w.take();
}

ClassifierMatrix deserialize_model(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  r.expect_magic("RVFL");
  const std::uint16_t version = r.get_u16();
  if (version != 1) throw CorruptStreamError("unsupported model version");
  const std::uint8_t kind = r.get_u8();
  if (kind > 1) throw CorruptStreamError("unknown classifier kind");
  const std::uint32_t l = r.get_u32();
  const std::uint32_t h = r.get_u32();
  if (r.remaining() != static_cast<std::size_t>(l) * h * 8)
    throw CorruptStreamError("model payload size mismatch");

  ClassifierMatrix model;
  model.kind = static_cast<ClassifierKind>(kind);
  model.weights.resize(l, h);
  for (std::uint32_t i = 0; i < l; ++i)
    for (std::uint32_t j = 0; j < h; ++j) model.weights(i, j) = r.get_f64();
  return model;
}

}  // namespace hololink
