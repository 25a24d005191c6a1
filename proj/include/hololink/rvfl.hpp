#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "hololink/dataset.hpp"

namespace hololink {

enum class ClassifierKind : std::uint8_t { Rls = 0, Centroid = 1 };

const char* to_string(ClassifierKind kind);

// Output weight matrix of a trained classifier, L x H.
struct ClassifierMatrix {
  Eigen::MatrixXd weights;
  ClassifierKind kind = ClassifierKind::Rls;

  int class_count() const { return static_cast<int>(weights.rows()); }
  int hidden_size() const { return static_cast<int>(weights.cols()); }
};

// Shared randomized part of the network: per-feature bipolar keys combined
// with thermometer codes and clipped to [-kappa, kappa]. Identical
// (seed, d, H) reproduce identical keys, so agents never exchange them.
struct EncoderConfig {
  int hidden_size = 0;  // H
  int kappa = 1;
  Eigen::MatrixXi feature_keys;  // d x H, entries in {-1, +1}
  std::uint64_t seed = 0;

  int feature_count() const { return static_cast<int>(feature_keys.rows()); }
};

// n x H integer activations, entries in [-kappa, kappa].
using HiddenBatch = Eigen::MatrixXi;

// i.i.d. uniform {-1, +1} key matrix, deterministic per seed.
Eigen::MatrixXi make_feature_keys(int d, int hidden_size, std::uint64_t seed);

EncoderConfig make_encoder(int d, int hidden_size, int kappa, std::uint64_t seed);

// First round(x * H) components +1, the rest -1. x must be in [0, 1].
Eigen::VectorXi thermometer_encode(double x, int hidden_size);

// clip_kappa( sum_i key_i (.) thermometer(x_i) )
Eigen::VectorXi hidden_activations(const Eigen::VectorXd& x, const EncoderConfig& cfg);

// Unclipped activation sums for a set of dataset rows; kappa-independent, so
// sweeps over kappa can share this work.
Eigen::MatrixXi encode_rows_raw(const Dataset& ds, std::span<const int> rows,
                                const Eigen::MatrixXi& feature_keys);

HiddenBatch clip_activations(const Eigen::MatrixXi& raw_sums, int kappa);

HiddenBatch encode_rows(const Dataset& ds, std::span<const int> rows,
                        const EncoderConfig& cfg);

std::vector<int> gather_labels(const Dataset& ds, std::span<const int> rows);

// Ridge readout against 0/1 one-hot targets, solved with a Cholesky
// factorization of (H^T H + lambda I).
ClassifierMatrix train_rls(const HiddenBatch& activations, std::span<const int> labels,
                           int num_classes, double lambda);

// Per-class mean of hidden activations. A class with no samples yields a zero
// row and sets *empty_class_seen when provided.
ClassifierMatrix train_centroids(const HiddenBatch& activations,
                                 std::span<const int> labels, int num_classes,
                                 bool* empty_class_seen = nullptr);

// Argmax readout: raw scores for the ridge classifier, cosine similarity for
// centroids (cosine with a zero vector is 0). Ties go to the lowest class.
int predict(const ClassifierMatrix& model, const Eigen::VectorXd& hidden);
int predict(const ClassifierMatrix& model, const Eigen::VectorXi& hidden);

// Fraction of rows whose prediction matches the label.
double evaluate_batch(const ClassifierMatrix& model, const HiddenBatch& activations,
                      std::span<const int> labels);

// Accuracy on the dataset's test split.
double evaluate(const ClassifierMatrix& model, const EncoderConfig& cfg,
                const Dataset& ds);

// Little-endian wire format: "RVFL", version u16, kind u8, L u32, H u32,
// then L*H doubles row-major.
std::vector<std::uint8_t> serialize_model(const ClassifierMatrix& model);
ClassifierMatrix deserialize_model(const std::vector<std::uint8_t>& bytes);

}  // namespace hololink
