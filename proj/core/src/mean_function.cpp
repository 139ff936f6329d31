#include "tgp/mean_function.hpp"

#include "tgp/error.hpp"

namespace tgp {
namespace {

enum class MeanTag : std::uint8_t { kZero = 0, kConstant = 1, kGridPrior = 2 };

void write_grid(BinaryWriter& out, const DemGrid& g) {
  out.u64(g.ncols);
  out.u64(g.nrows);
  out.f64(g.xllcorner);
  out.f64(g.yllcorner);
  out.f64(g.cellsize);
  out.f64(g.nodata);
  for (const double v : g.values) out.f64(v);
}

DemGrid read_grid(BinaryReader& in) {
  DemGrid g;
  g.ncols = in.u64();
  g.nrows = in.u64();
  g.xllcorner = in.f64();
  g.yllcorner = in.f64();
  g.cellsize = in.f64();
  g.nodata = in.f64();
  if (g.ncols == 0 || g.nrows == 0 || g.ncols > (1u << 24) ||
      g.nrows > (1u << 24)) {
    fail(ErrorKind::kParse, "embedded prior grid has invalid shape");
  }
  g.values.resize(g.ncols * g.nrows);
  for (double& v : g.values) v = in.f64();
  return g;
}

}  // namespace

Vector eval_mean(const MeanFunction& mean, const Points& x) {
  return std::visit(
      [&](const auto& m) -> Vector {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ZeroMean>) {
          return Vector::Zero(x.rows());
        } else if constexpr (std::is_same_v<T, ConstantMean>) {
          return Vector::Constant(x.rows(), m.value);
        } else {
          const Points world = m.stats.denormalize_points(x);
          Vector out(x.rows());
          for (Eigen::Index i = 0; i < x.rows(); ++i) {
            out(i) = (m.surface(world(i, 0), world(i, 1)) - m.stats.y_mean) /
                     m.stats.y_std;
          }
          return out;
        }
      },
      mean);
}

MeanFunction bilinear_prior(const DemGrid& prior, const NormStats& stats) {
  return GridPriorMean{BilinearSurface(prior), stats};
}

void write_mean(BinaryWriter& out, const MeanFunction& mean) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ZeroMean>) {
          out.u8(static_cast<std::uint8_t>(MeanTag::kZero));
        } else if constexpr (std::is_same_v<T, ConstantMean>) {
          out.u8(static_cast<std::uint8_t>(MeanTag::kConstant));
          out.f64(m.value);
        } else {
          out.u8(static_cast<std::uint8_t>(MeanTag::kGridPrior));
          m.stats.write(out);
          write_grid(out, m.surface.grid());
        }
      },
      mean);
}

MeanFunction read_mean(BinaryReader& in) {
  switch (static_cast<MeanTag>(in.u8())) {
    case MeanTag::kZero:
      return ZeroMean{};
    case MeanTag::kConstant:
      return ConstantMean{in.f64()};
    case MeanTag::kGridPrior: {
      const NormStats stats = NormStats::read(in);
      return GridPriorMean{BilinearSurface(read_grid(in)), stats};
    }
  }
  fail(ErrorKind::kParse, "unknown mean function tag");
}

}  // namespace tgp
