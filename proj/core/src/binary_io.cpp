#include "tgp/binary_io.hpp"

#include <cstring>

#include "tgp/error.hpp"

namespace tgp {
namespace {

template <typename T>
void put(std::string& buf, T v) {
  char tmp[sizeof(T)];
  std::memcpy(tmp, &v, sizeof(T));
  buf.append(tmp, sizeof(T));
}

template <typename T>
T get(std::string_view bytes) {
  T v;
  std::memcpy(&v, bytes.data(), sizeof(T));
  return v;
}

// Guards against absurd sizes in corrupt files before allocating.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

}  // namespace

void BinaryWriter::u8(std::uint8_t v) { put(buf_, v); }
void BinaryWriter::u32(std::uint32_t v) { put(buf_, v); }
void BinaryWriter::u64(std::uint64_t v) { put(buf_, v); }
void BinaryWriter::f64(double v) { put(buf_, v); }

void BinaryWriter::str(std::string_view s) {
  u64(s.size());
  buf_.append(s);
}

void BinaryWriter::vec(const Vector& v) {
  u64(static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
}

void BinaryWriter::mat(const Matrix& m) {
  u64(static_cast<std::uint64_t>(m.rows()));
  u64(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) f64(m(i, j));
  }
}

void BinaryWriter::points(const Points& p) {
  u64(static_cast<std::uint64_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    f64(p(i, 0));
    f64(p(i, 1));
  }
}

void BinaryWriter::raw(std::string_view bytes) { buf_.append(bytes); }

void BinaryWriter::section(std::string_view tag, const BinaryWriter& payload) {
  if (tag.size() != 4) {
    fail(ErrorKind::kInvalidInput, "section tags are four characters");
  }
  buf_.append(tag);
  u64(payload.bytes().size());
  buf_.append(payload.bytes());
}

std::string_view BinaryReader::take(std::size_t n) {
  if (n > data_.size() - pos_) {
    fail(ErrorKind::kParse, "model file truncated at byte " +
                                std::to_string(pos_) + " (needed " +
                                std::to_string(n) + " more)");
  }
  const std::string_view out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t BinaryReader::u8() { return get<std::uint8_t>(take(1)); }
std::uint32_t BinaryReader::u32() { return get<std::uint32_t>(take(4)); }
std::uint64_t BinaryReader::u64() { return get<std::uint64_t>(take(8)); }
double BinaryReader::f64() { return get<double>(take(8)); }

std::string BinaryReader::str() {
  const std::uint64_t n = u64();
  return std::string(take(n));
}

Vector BinaryReader::vec() {
  const std::uint64_t n = u64();
  if (n > kMaxElements) fail(ErrorKind::kParse, "vector length out of range");
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = f64();
  return v;
}

Matrix BinaryReader::mat() {
  const std::uint64_t rows = u64();
  const std::uint64_t cols = u64();
  if (rows > kMaxElements || cols > kMaxElements ||
      (cols != 0 && rows > kMaxElements / cols)) {
    fail(ErrorKind::kParse, "matrix shape out of range");
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = f64();
  }
  return m;
}

Points BinaryReader::points() {
  const std::uint64_t n = u64();
  if (n > kMaxElements) fail(ErrorKind::kParse, "point count out of range");
  Points p(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    p(i, 0) = f64();
    p(i, 1) = f64();
  }
  return p;
}

std::string_view BinaryReader::raw(std::size_t n) { return take(n); }

BinaryReader BinaryReader::section(std::string_view tag) {
  const std::string_view got = take(4);
  if (got != tag) {
    fail(ErrorKind::kParse, "expected section '" + std::string(tag) +
                                "', found '" + std::string(got) + "'");
  }
  const std::uint64_t n = u64();
  return BinaryReader(take(n));
}

std::string BinaryReader::peek_tag() const {
  if (data_.size() - pos_ < 4) return {};
  return std::string(data_.substr(pos_, 4));
}

void BinaryReader::expect_end(std::string_view what) const {
  if (!at_end()) {
    fail(ErrorKind::kParse, std::string(what) + ": " +
                                std::to_string(data_.size() - pos_) +
                                " trailing bytes");
  }
}

}  // namespace tgp
