#include "tgp/grid.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "tgp/error.hpp"

namespace tgp {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

struct Token {
  std::string_view text;
  std::size_t line;
};

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view text) : text_(text) {}

  std::optional<Token> next() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= text_.size()) return std::nullopt;
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    return Token{text_.substr(start, pos_ - start), line_};
  }

  std::optional<Token> peek() {
    const std::size_t pos = pos_;
    const std::size_t line = line_;
    auto tok = next();
    pos_ = pos;
    line_ = line;
    return tok;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) return std::nullopt;
  return v;
}

[[noreturn]] void parse_fail(std::string_view source, std::size_t line,
                             const std::string& message) {
  fail(ErrorKind::kParse, std::string(source) + ":" + std::to_string(line) +
                              ": " + message);
}

constexpr std::array<std::string_view, 6> kHeaderKeys = {
    "ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value"};

}  // namespace

DemGrid DemGrid::filled(std::size_t ncols, std::size_t nrows, double cellsize,
                        double value, double xllcorner, double yllcorner) {
  DemGrid g;
  g.ncols = ncols;
  g.nrows = nrows;
  g.cellsize = cellsize;
  g.xllcorner = xllcorner;
  g.yllcorner = yllcorner;
  g.values.assign(ncols * nrows, value);
  return g;
}

Point DemGrid::cell_center(std::size_t row, std::size_t col) const {
  return Point(xllcorner + (static_cast<double>(col) + 0.5) * cellsize,
               yllcorner + (static_cast<double>(nrows - row) - 0.5) * cellsize);
}

Points DemGrid::cell_centers() const {
  Points p(static_cast<Eigen::Index>(nrows * ncols), 2);
  for (std::size_t r = 0; r < nrows; ++r) {
    for (std::size_t c = 0; c < ncols; ++c) {
      p.row(static_cast<Eigen::Index>(r * ncols + c)) = cell_center(r, c);
    }
  }
  return p;
}

bool DemGrid::same_geometry(const DemGrid& other) const {
  return ncols == other.ncols && nrows == other.nrows &&
         xllcorner == other.xllcorner && yllcorner == other.yllcorner &&
         cellsize == other.cellsize;
}

void DemGrid::validate() const {
  if (ncols == 0 || nrows == 0) {
    fail(ErrorKind::kInvalidInput, "grid has zero rows or columns");
  }
  if (!(cellsize > 0.0) || !std::isfinite(cellsize)) {
    fail(ErrorKind::kInvalidInput, "grid cellsize must be positive");
  }
  if (!std::isfinite(xllcorner) || !std::isfinite(yllcorner)) {
    fail(ErrorKind::kInvalidInput, "grid corner must be finite");
  }
  if (values.size() != ncols * nrows) {
    fail(ErrorKind::kInvalidInput, "grid value count does not match shape");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!is_nodata(values[i]) && !std::isfinite(values[i])) {
      fail(ErrorKind::kInvalidInput,
           "non-finite grid value at index " + std::to_string(i));
    }
  }
}

DemGrid parse_asc(std::string_view text, std::string_view source) {
  Tokenizer tok(text);
  std::array<std::optional<double>, kHeaderKeys.size()> header{};
  std::size_t last_line = 1;

  // Header: key/value pairs until the first numeric token.
  while (true) {
    const auto peeked = tok.peek();
    if (!peeked) break;
    if (to_double(peeked->text)) break;
    const Token key = *tok.next();
    last_line = key.line;
    const std::string k = lower(key.text);
    const auto it = std::find(kHeaderKeys.begin(), kHeaderKeys.end(), k);
    if (it == kHeaderKeys.end()) {
      parse_fail(source, key.line,
                 "unknown header key '" + std::string(key.text) + "'");
    }
    const auto value = tok.next();
    if (!value || value->line != key.line) {
      parse_fail(source, key.line,
                 "missing value for header key '" + std::string(key.text) + "'");
    }
    const auto v = to_double(value->text);
    if (!v) {
      parse_fail(source, value->line,
                 "non-numeric header value '" + std::string(value->text) + "'");
    }
    header[static_cast<std::size_t>(it - kHeaderKeys.begin())] = *v;
  }
  for (std::size_t i = 0; i < kHeaderKeys.size(); ++i) {
    if (!header[i]) {
      parse_fail(source, last_line,
                 "missing header key '" + lower(kHeaderKeys[i]) + "'");
    }
  }

  const auto as_count = [&](std::size_t i) -> std::size_t {
    const double v = *header[i];
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) {
      parse_fail(source, last_line,
                 std::string(kHeaderKeys[i]) + " must be a positive integer");
    }
    return static_cast<std::size_t>(v);
  };

  DemGrid g;
  g.ncols = as_count(0);
  g.nrows = as_count(1);
  g.xllcorner = *header[2];
  g.yllcorner = *header[3];
  g.cellsize = *header[4];
  g.nodata = *header[5];
  if (!(g.cellsize > 0.0)) {
    parse_fail(source, last_line, "cellsize must be positive");
  }

  const std::size_t expected = g.ncols * g.nrows;
  g.values.reserve(expected);
  std::size_t count = 0;
  while (const auto t = tok.next()) {
    const auto v = to_double(t->text);
    if (!v) {
      parse_fail(source, t->line,
                 "non-numeric value '" + std::string(t->text) + "'");
    }
    if (!std::isfinite(*v) && *v != g.nodata) {
      parse_fail(source, t->line, "non-finite value");
    }
    if (count < expected) g.values.push_back(*v);
    ++count;
    last_line = t->line;
  }
  if (count != expected) {
    parse_fail(source, last_line,
               "expected " + std::to_string(expected) + " values (" +
                   std::to_string(g.ncols) + "x" + std::to_string(g.nrows) +
                   "), found " + std::to_string(count));
  }
  return g;
}

std::string format_asc(const DemGrid& dem) {
  std::string out;
  char buf[64];
  const auto emit = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%-14s%.17g\n", key, v);
    out += buf;
  };
  std::snprintf(buf, sizeof(buf), "%-14s%zu\n", "NCOLS", dem.ncols);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-14s%zu\n", "NROWS", dem.nrows);
  out += buf;
  emit("XLLCORNER", dem.xllcorner);
  emit("YLLCORNER", dem.yllcorner);
  emit("CELLSIZE", dem.cellsize);
  emit("NODATA_VALUE", dem.nodata);
  out.reserve(out.size() + dem.values.size() * 24);
  for (std::size_t r = 0; r < dem.nrows; ++r) {
    for (std::size_t c = 0; c < dem.ncols; ++c) {
      std::snprintf(buf, sizeof(buf), c == 0 ? "%.17g" : " %.17g",
                    dem.at(r, c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

DemGrid read_asc(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_asc(ss.str(), path.string());
}

void write_asc(const DemGrid& dem, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << format_asc(dem);
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

DemGrid downsample(const DemGrid& dem, std::size_t factor) {
  if (factor == 0) fail(ErrorKind::kInvalidConfig, "downsample factor must be >= 1");
  if (factor > dem.ncols || factor > dem.nrows) {
    fail(ErrorKind::kInvalidConfig,
         "downsample factor " + std::to_string(factor) + " exceeds grid " +
             std::to_string(dem.ncols) + "x" + std::to_string(dem.nrows));
  }
  if (factor == 1) return dem;
  DemGrid out;
  out.ncols = (dem.ncols + factor - 1) / factor;
  out.nrows = (dem.nrows + factor - 1) / factor;
  out.nodata = dem.nodata;
  const double f = static_cast<double>(factor);
  out.cellsize = dem.cellsize * f;
  out.xllcorner = dem.xllcorner - 0.5 * (f - 1.0) * dem.cellsize;
  out.yllcorner = dem.yllcorner +
                  (static_cast<double>(dem.nrows) - 0.5) * dem.cellsize -
                  (static_cast<double>(out.nrows) - 0.5) * out.cellsize;
  out.values.resize(out.ncols * out.nrows);
  for (std::size_t r = 0; r < out.nrows; ++r) {
    for (std::size_t c = 0; c < out.ncols; ++c) {
      out.at(r, c) = dem.at(r * factor, c * factor);
    }
  }
  return out;
}

BilinearSurface::BilinearSurface(DemGrid grid) : grid_(std::move(grid)) {
  grid_.validate();
  if (grid_.ncols < 2 || grid_.nrows < 2) {
    fail(ErrorKind::kInvalidInput, "bilinear prior needs at least 2x2 cells");
  }
  for (const double v : grid_.values) {
    if (grid_.is_nodata(v)) {
      fail(ErrorKind::kInvalidInput, "bilinear prior grid contains nodata");
    }
  }
}

double BilinearSurface::operator()(double x, double y) const {
  const DemGrid& g = grid_;
  // Fractional column from west, fractional row from north, both in
  // cell-center index space.
  double fc = (x - g.xllcorner) / g.cellsize - 0.5;
  double fr = static_cast<double>(g.nrows) - 0.5 - (y - g.yllcorner) / g.cellsize;
  fc = std::clamp(fc, 0.0, static_cast<double>(g.ncols - 1));
  fr = std::clamp(fr, 0.0, static_cast<double>(g.nrows - 1));
  const std::size_t c0 = std::min(static_cast<std::size_t>(fc), g.ncols - 2);
  const std::size_t r0 = std::min(static_cast<std::size_t>(fr), g.nrows - 2);
  const double tc = fc - static_cast<double>(c0);
  const double tr = fr - static_cast<double>(r0);
  const double top = (1.0 - tc) * g.at(r0, c0) + tc * g.at(r0, c0 + 1);
  const double bottom = (1.0 - tc) * g.at(r0 + 1, c0) + tc * g.at(r0 + 1, c0 + 1);
  return (1.0 - tr) * top + tr * bottom;
}

}  // namespace tgp
