#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "hololink/rvfl.hpp"

namespace hololink {

// Truncated SVD of the classifier reshaped into an M x M square,
// M = ceil(sqrt(H*L)). Keeping a component costs 2M+1 stored values.
struct SvdPayload {
  struct Meta {
    int hidden_size = 0;
    int num_classes = 0;
    int square_size = 0;  // M
    int rank = 0;         // t
  };
  Eigen::MatrixXd u;      // M x t
  Eigen::VectorXd sigma;  // length t, descending
  Eigen::MatrixXd v;      // M x t
  Meta meta;

  std::int64_t value_count() const {
    return static_cast<std::int64_t>(meta.rank) * (2 * meta.square_size + 1);
  }
};

// A zlib (RFC 1950) stream holding a serialized classifier.
struct BytePayload {
  std::vector<std::uint8_t> data;
  std::uint64_t original_len = 0;

  double achieved_ratio() const {
    return data.empty() ? 0.0
                        : static_cast<double>(original_len) / static_cast<double>(data.size());
  }
};

int svd_square_size(int hidden_size, int num_classes);

// t = max(1, floor(H*L / (ratio * (2M+1)))), capped at M.
int svd_rank_for_ratio(int hidden_size, int num_classes, double ratio);

SvdPayload svd_compress(const ClassifierMatrix& model, double ratio);
ClassifierMatrix svd_decompress(const SvdPayload& payload, ClassifierKind kind);

BytePayload deflate_compress(const ClassifierMatrix& model);
ClassifierMatrix deflate_decompress(const BytePayload& payload);

// Raw byte-level codec used by the classifier round trip above.
std::vector<std::uint8_t> deflate_bytes(const std::vector<std::uint8_t>& raw);
std::vector<std::uint8_t> inflate_bytes(const std::vector<std::uint8_t>& stream);

// Snaps every entry to the nearest of `levels` uniformly spaced values over
// [min(W), max(W)] (midpoints go to the lower level). Constant matrices are
// returned unchanged.
ClassifierMatrix quantize(const ClassifierMatrix& model, int levels);

// Little-endian wire format: "SVDT", version u16, H u32, L u32, M u32, t u32,
// then sigma, U (column-major), V (column-major) as doubles.
std::vector<std::uint8_t> serialize_svd(const SvdPayload& payload);
SvdPayload deserialize_svd(const std::vector<std::uint8_t>& bytes);

}  // namespace hololink
