#pragma once

#include <variant>

#include "tgp/binary_io.hpp"
#include "tgp/dataset.hpp"
#include "tgp/grid.hpp"
#include "tgp/types.hpp"

namespace tgp {

struct ZeroMean {};

// Learned constant offset (normalized target units).
struct ConstantMean {
  double value = 0.0;
};

// Fixed prior surface interpolated from a low-resolution raster. Inputs are
// normalized points; the stats map them to world coordinates and map the
// interpolated elevation back to normalized target units.
struct GridPriorMean {
  BilinearSurface surface;
  NormStats stats;
};

using MeanFunction = std::variant<ZeroMean, ConstantMean, GridPriorMean>;

Vector eval_mean(const MeanFunction& mean, const Points& x);

inline bool is_learnable(const MeanFunction& mean) {
  return std::holds_alternative<ConstantMean>(mean);
}

// Bilinear prior over a raster's cell centers. With identity stats the mean
// is evaluated directly in world coordinates and meters.
MeanFunction bilinear_prior(const DemGrid& prior,
                            const NormStats& stats = NormStats::identity());

void write_mean(BinaryWriter& out, const MeanFunction& mean);
MeanFunction read_mean(BinaryReader& in);

}  // namespace tgp
