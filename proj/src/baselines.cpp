#include "hololink/baselines.hpp"

#include <zlib.h>

#include <Eigen/SVD>
#include <cmath>

#include "hololink/common.hpp"

namespace hololink {

int svd_square_size(int hidden_size, int num_classes) {
  const auto hl = static_cast<double>(
      static_cast<std::int64_t>(hidden_size) * num_classes);
  return static_cast<int>(std::ceil(std::sqrt(hl)));
}

int svd_rank_for_ratio(int hidden_size, int num_classes, double ratio) {
  if (!(ratio > 1.0)) throw Error("svd compression ratio must exceed 1");
  const std::int64_t hl = static_cast<std::int64_t>(hidden_size) * num_classes;
  const int m = svd_square_size(hidden_size, num_classes);
  const double budget = static_cast<double>(hl) / (ratio * static_cast<double>(2 * m + 1));
  int rank = static_cast<int>(std::floor(budget));
  rank = std::max(rank, 1);
  return std::min(rank, m);
}

namespace {

Eigen::MatrixXd reshape_square(const ClassifierMatrix& model, int m) {
  const int h = model.hidden_size();
  const std::int64_t hl = static_cast<std::int64_t>(h) * model.class_count();
  Eigen::MatrixXd square = Eigen::MatrixXd::Zero(m, m);
  for (std::int64_t k = 0; k < hl; ++k)
    square(static_cast<Eigen::Index>(k / m), static_cast<Eigen::Index>(k % m)) =
        model.weights(static_cast<Eigen::Index>(k / h), static_cast<Eigen::Index>(k % h));
  return square;
}

void zlib_throw(int code, const char* what) {
  throw CorruptStreamError(std::string(what) + " (zlib error " + std::to_string(code) + ")");
}

}  // namespace

SvdPayload svd_compress(const ClassifierMatrix& model, double ratio) {
  if (!model.weights.allFinite())
    throw SvdFailureError("classifier contains non-finite values");
  const int m = svd_square_size(model.hidden_size(), model.class_count());
  const int rank = svd_rank_for_ratio(model.hidden_size(), model.class_count(), ratio);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(reshape_square(model, m),
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw SvdFailureError("SVD did not converge");

  SvdPayload payload;
  payload.meta = {model.hidden_size(), model.class_count(), m, rank};
  payload.u = svd.matrixU().leftCols(rank);
  payload.sigma = svd.singularValues().head(rank);
  payload.v = svd.matrixV().leftCols(rank);
  return payload;
}

ClassifierMatrix svd_decompress(const SvdPayload& payload, ClassifierKind kind) {
  const auto& meta = payload.meta;
  if (payload.u.rows() != meta.square_size || payload.u.cols() != meta.rank ||
      payload.v.rows() != meta.square_size || payload.v.cols() != meta.rank ||
      payload.sigma.size() != meta.rank)
    throw ShapeMismatchError("SVD payload factors do not match its meta");

  const Eigen::MatrixXd square =
      payload.u * payload.sigma.asDiagonal() * payload.v.transpose();

  ClassifierMatrix model;
  model.kind = kind;
  model.weights.resize(meta.num_classes, meta.hidden_size);
  const int h = meta.hidden_size;
  const std::int64_t hl = static_cast<std::int64_t>(h) * meta.num_classes;
  for (std::int64_t k = 0; k < hl; ++k)
    model.weights(static_cast<Eigen::Index>(k / h), static_cast<Eigen::Index>(k % h)) =
        square(static_cast<Eigen::Index>(k / meta.square_size),
               static_cast<Eigen::Index>(k % meta.square_size));
  return model;
}

std::vector<std::uint8_t> deflate_bytes(const std::vector<std::uint8_t>& raw) {
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> out(bound);
  int code = compress2(out.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                       Z_BEST_COMPRESSION);
  if (code != Z_OK) zlib_throw(code, "deflate failed");
  out.resize(bound);
  return out;
}

std::vector<std::uint8_t> inflate_bytes(const std::vector<std::uint8_t>& stream) {
  z_stream zs{};
  int code = inflateInit(&zs);
  if (code != Z_OK) zlib_throw(code, "inflate init failed");

  std::vector<std::uint8_t> out;
  std::uint8_t chunk[16384];
  zs.next_in = const_cast<Bytef*>(stream.data());
  zs.avail_in = static_cast<uInt>(stream.size());
  do {
    zs.next_out = chunk;
    zs.avail_out = sizeof chunk;
    code = inflate(&zs, Z_NO_FLUSH);
    if (code != Z_OK && code != Z_STREAM_END) {
      inflateEnd(&zs);
      zlib_throw(code, "inflate failed");
    }
    out.insert(out.end(), chunk, chunk + (sizeof chunk - zs.avail_out));
  } while (code != Z_STREAM_END && zs.avail_in > 0);
  inflateEnd(&zs);
  if (code != Z_STREAM_END) throw CorruptStreamError("truncated zlib stream");
  return out;
}

BytePayload deflate_compress(const ClassifierMatrix& model) {
  const std::vector<std::uint8_t> raw = serialize_model(model);
  BytePayload payload;
  payload.original_len = raw.size();
  payload.data = deflate_bytes(raw);
  return payload;
}

ClassifierMatrix deflate_decompress(const BytePayload& payload) {
  const std::vector<std::uint8_t> raw = inflate_bytes(payload.data);
  if (raw.size() != payload.original_len)
    throw CorruptStreamError("inflated size does not match original length");
  return deserialize_model(raw);
}

ClassifierMatrix quantize(const ClassifierMatrix& model, int levels) {
  if (levels < 2) throw InvalidLevelsError("need at least 2 quantization levels");
  const double lo = model.weights.minCoeff();
  const double hi = model.weights.maxCoeff();
  if (lo == hi) return model;

  const double step = (hi - lo) / static_cast<double>(levels - 1);
  ClassifierMatrix out = model;
  out.weights = model.weights.unaryExpr([&](double w) {
    // ceil(q - 1/2) rounds to nearest with midpoints going down
    double k = std::ceil((w - lo) / step - 0.5);
    k = std::clamp(k, 0.0, static_cast<double>(levels - 1));
    return lo + k * step;
  });
  return out;
}

std::vector<std::uint8_t> serialize_svd(const SvdPayload& payload) {
  ByteWriter w;
  w.put_magic("SVDT");
  w.put_u16(1);
  w.put_u32(static_cast<std::uint32_t>(payload.meta.hidden_size));
  w.put_u32(static_cast<std::uint32_t>(payload.meta.num_classes));
  w.put_u32(static_cast<std::uint32_t>(payload.meta.square_size));
  w.put_u32(static_cast<std::uint32_t>(payload.meta.rank));
  for (Eigen::Index i = 0; i < payload.sigma.size(); ++i) w.put_f64(payload.sigma[i]);
  for (Eigen::Index c = 0; c < payload.u.cols(); ++c)
    for (Eigen::Index r = 0; r < payload.u.rows(); ++r) w.put_f64(payload.u(r, c));
  for (Eigen::Index c = 0; c < payload.v.cols(); ++c)
    for (Eigen::Index r = 0; r < payload.v.rows(); ++r) w.put_f64(payload.v(r, c));
  return w.take();
}

SvdPayload deserialize_svd(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  r.expect_magic("SVDT");
  if (r.get_u16() != 1) throw CorruptStreamError("unsupported SVD payload version");

  SvdPayload payload;
  payload.meta.hidden_size = static_cast<int>(r.get_u32());
  payload.meta.num_classes = static_cast<int>(r.get_u32());
  payload.meta.square_size = static_cast<int>(r.get_u32());
  payload.meta.rank = static_cast<int>(r.get_u32());
  const int m = payload.meta.square_size;
  const int t = payload.meta.rank;
  if (t < 0 || m < 1 || t > m) throw CorruptStreamError("invalid SVD payload meta");
  if (r.remaining() != static_cast<std::size_t>(t) * (2 * m + 1) * 8)
    throw CorruptStreamError("SVD payload size mismatch");

  payload.sigma.resize(t);
  for (int i = 0; i < t; ++i) payload.sigma[i] = r.get_f64();
  payload.u.resize(m, t);
  for (int c = 0; c < t; ++c)
    for (int row = 0; row < m; ++row) payload.u(row, c) = r.get_f64();
  payload.v.resize(m, t);
  for (int c = 0; c < t; ++c)
    for (int row = 0; row < m; ++row) payload.v(row, c) = r.get_f64();
  return payload;
}

}  // namespace hololink
