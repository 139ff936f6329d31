#pragma once

#include <filesystem>
#include <optional>

#include "tgp/binary_io.hpp"
#include "tgp/grid.hpp"
#include "tgp/types.hpp"

namespace tgp {

// z-score statistics. Noise variances are scaled by 1 / y_std^2 so that they
// live in normalized target units alongside Y.
struct NormStats {
  double x_mean[2] = {0.0, 0.0};
  double x_std[2] = {1.0, 1.0};
  double y_mean = 0.0;
  double y_std = 1.0;

  static NormStats identity() { return {}; }
  static NormStats fit(const Points& x, const Vector& y);

  [[nodiscard]] Points normalize_points(const Points& world) const;
  [[nodiscard]] Points denormalize_points(const Points& normalized) const;
  [[nodiscard]] Vector normalize_targets(const Vector& y) const;
  [[nodiscard]] Vector denormalize_targets(const Vector& y) const;
  [[nodiscard]] Vector normalize_variances(const Vector& r) const;
  [[nodiscard]] Vector denormalize_variances(const Vector& r) const;

  void write(BinaryWriter& out) const;
  static NormStats read(BinaryReader& in);

  bool operator==(const NormStats&) const = default;
};

// Training samples in normalized units, with the statistics needed to map
// back to meters.
struct Dataset {
  Points x;
  Vector y;
  std::optional<Vector> r;  // noise variances
  NormStats stats;

  [[nodiscard]] Eigen::Index size() const { return x.rows(); }
  // Subset by row indices.
  [[nodiscard]] Dataset slice(const std::vector<Eigen::Index>& rows) const;
};

// Builds a dataset from raw world-unit samples and normalizes it.
Dataset make_dataset(const Points& world_x, const Vector& y,
                     const std::optional<Vector>& r);

// One sample per non-nodata cell, taken at the cell center. When var_grid is
// given, cells that are nodata in either grid are skipped.
Dataset grid_to_dataset(const DemGrid& dem, const DemGrid* var_grid = nullptr);

// CSV with header x,y,elevation,variance in world units.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);

}  // namespace tgp
