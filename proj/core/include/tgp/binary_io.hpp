#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

#include "tgp/types.hpp"

namespace tgp {

static_assert(std::endian::native == std::endian::little,
              "model files are written in little-endian byte order");

// Append-only byte buffer. Doubles are stored as raw IEEE-754 bits so that
// a read/write cycle is bit-exact.
class BinaryWriter {
 public:
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void str(std::string_view s);
  void vec(const Vector& v);
  void mat(const Matrix& m);
  void points(const Points& p);
  void raw(std::string_view bytes);
  // Four-character tag, u64 payload length, payload.
  void section(std::string_view tag, const BinaryWriter& payload);

  [[nodiscard]] const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::string_view bytes) : data_(bytes) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string str();
  Vector vec();
  Matrix mat();
  Points points();
  std::string_view raw(std::size_t n);
  // Reads a section header, checks the tag and returns a reader over the
  // payload.
  BinaryReader section(std::string_view tag);
  [[nodiscard]] std::string peek_tag() const;

  [[nodiscard]] bool at_end() const { return pos_ == data_.size(); }
  void expect_end(std::string_view what) const;

 private:
  std::string_view take(std::size_t n);

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace tgp
