#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace hololink {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// dataset loading / splitting
struct FileNotFoundError : Error { using Error::Error; };
struct MissingLabelColumnError : Error { using Error::Error; };
struct NonNumericFeatureError : Error {
  NonNumericFeatureError(std::size_t row, std::size_t col, const std::string& cell)
      : Error("non-numeric feature at data row " + std::to_string(row) +
              ", column " + std::to_string(col) + ": '" + cell + "'"),
        row(row), col(col) {}
  std::size_t row;
  std::size_t col;
};
struct EmptyDatasetError : Error { using Error::Error; };
struct TooManyAgentsError : Error { using Error::Error; };

// model training / evaluation
struct OutOfRangeError : Error { using Error::Error; };
struct NumericalFailureError : Error { using Error::Error; };
struct EmptyTestSetError : Error { using Error::Error; };
struct EmptyShardError : Error { using Error::Error; };

// codecs
struct LengthMismatchError : Error { using Error::Error; };
struct KeyShapeMismatchError : Error { using Error::Error; };
struct MetaMismatchError : Error { using Error::Error; };
struct SvdFailureError : Error { using Error::Error; };
struct ShapeMismatchError : Error { using Error::Error; };
struct CorruptStreamError : Error { using Error::Error; };
struct InvalidLevelsError : Error { using Error::Error; };

// reporting / files
struct IoError : Error { using Error::Error; };

// Little-endian binary encoding used by every wire format in the project.
class ByteWriter {
 public:
  void put_bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void put_magic(const char tag[4]) { put_bytes(tag, 4); }
  void put_u8(std::uint8_t v) { buf_.push_back(v); }
  void put_u16(std::uint16_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v));
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void put_u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void put_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void put_f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(bits);
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }
  const std::vector<std::uint8_t>& bytes() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

// Bounds-checked reader; throws CorruptStreamError on truncated input.
class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}
  explicit ByteReader(const std::vector<std::uint8_t>& v) : ByteReader(v.data(), v.size()) {}

  void expect_magic(const char tag[4]) {
    need(4);
    if (std::memcmp(data_ + pos_, tag, 4) != 0)
      throw CorruptStreamError(std::string("bad magic, expected '") + std::string(tag, 4) + "'");
    pos_ += 4;
  }
  std::uint8_t get_u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint16_t get_u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(data_[pos_]) |
                      static_cast<std::uint16_t>(data_[pos_ + 1]) << 8;
    pos_ += 2;
    return v;
  }
  std::uint32_t get_u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t get_u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double get_f64() {
    std::uint64_t bits = get_u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::size_t remaining() const { return size_ - pos_; }
  bool done() const { return pos_ == size_; }

 private:
  void need(std::size_t n) const {
    if (size_ - pos_ < n) throw CorruptStreamError("truncated payload");
  }
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

}  // namespace hololink
