#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tgp/types.hpp"

namespace tgp {

// Georeferenced raster. Values are row-major with row 0 the northernmost
// row, matching the ESRI ASCII grid convention.
struct DemGrid {
  std::size_t ncols = 0;
  std::size_t nrows = 0;
  double xllcorner = 0.0;
  double yllcorner = 0.0;
  double cellsize = 1.0;
  double nodata = -9999.0;
  std::vector<double> values;

  static DemGrid filled(std::size_t ncols, std::size_t nrows, double cellsize,
                        double value, double xllcorner = 0.0,
                        double yllcorner = 0.0);

  [[nodiscard]] std::size_t size() const { return values.size(); }
  [[nodiscard]] double& at(std::size_t row, std::size_t col) {
    return values[row * ncols + col];
  }
  [[nodiscard]] double at(std::size_t row, std::size_t col) const {
    return values[row * ncols + col];
  }
  [[nodiscard]] bool is_nodata(double v) const { return v == nodata; }

  // World coordinates (meters) of a cell center.
  [[nodiscard]] Point cell_center(std::size_t row, std::size_t col) const;
  [[nodiscard]] Points cell_centers() const;

  // Same shape, origin and cell size (nodata sentinel not compared).
  [[nodiscard]] bool same_geometry(const DemGrid& other) const;

  // Throws kInvalidInput when the invariants do not hold.
  void validate() const;

  bool operator==(const DemGrid&) const = default;
};

DemGrid parse_asc(std::string_view text, std::string_view source = "<memory>");
std::string format_asc(const DemGrid& dem);
DemGrid read_asc(const std::filesystem::path& path);
void write_asc(const DemGrid& dem, const std::filesystem::path& path);

// Stride decimation anchored at the top-left cell. Each kept cell keeps its
// world-space center; the cell size grows by `factor`.
DemGrid downsample(const DemGrid& dem, std::size_t factor);

// Continuous bilinear interpolant through the cell centers of a raster, with
// constant extrapolation past the outermost centers.
class BilinearSurface {
 public:
  explicit BilinearSurface(DemGrid grid);

  [[nodiscard]] double operator()(double x, double y) const;
  [[nodiscard]] const DemGrid& grid() const { return grid_; }

 private:
  DemGrid grid_;
};

}  // namespace tgp
