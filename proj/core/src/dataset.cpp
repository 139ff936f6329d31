#include "tgp/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "tgp/error.hpp"

namespace tgp {
namespace {

// Population standard deviation; degenerate spreads fall back to 1 so that
// normalization stays invertible.
std::pair<double, double> mean_std(const Eigen::Ref<const Vector>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = v.sum() / n;
  const double var = (v.array() - mean).square().sum() / n;
  const double sd = std::sqrt(var);
  return {mean, sd > 1e-300 && std::isfinite(sd) ? sd : 1.0};
}

}  // namespace

NormStats NormStats::fit(const Points& x, const Vector& y) {
  if (x.rows() == 0 || x.rows() != y.size()) {
    fail(ErrorKind::kEmptyDataset, "cannot normalize an empty dataset");
  }
  NormStats s;
  for (int d = 0; d < 2; ++d) {
    const Vector col = x.col(d);
    std::tie(s.x_mean[d], s.x_std[d]) = mean_std(col);
  }
  std::tie(s.y_mean, s.y_std) = mean_std(y);
  return s;
}

Points NormStats::normalize_points(const Points& world) const {
  Points out(world.rows(), 2);
  for (int d = 0; d < 2; ++d) {
    out.col(d) = (world.col(d).array() - x_mean[d]) / x_std[d];
  }
  return out;
}

Points NormStats::denormalize_points(const Points& normalized) const {
  Points out(normalized.rows(), 2);
  for (int d = 0; d < 2; ++d) {
    out.col(d) = normalized.col(d).array() * x_std[d] + x_mean[d];
  }
  return out;
}

Vector NormStats::normalize_targets(const Vector& y) const {
  return (y.array() - y_mean) / y_std;
}

Vector NormStats::denormalize_targets(const Vector& y) const {
  return y.array() * y_std + y_mean;
}

Vector NormStats::normalize_variances(const Vector& r) const {
  return r / (y_std * y_std);
}

Vector NormStats::denormalize_variances(const Vector& r) const {
  return r * (y_std * y_std);
}

void NormStats::write(BinaryWriter& out) const {
  out.f64(x_mean[0]);
  out.f64(x_mean[1]);
  out.f64(x_std[0]);
  out.f64(x_std[1]);
  out.f64(y_mean);
  out.f64(y_std);
}

NormStats NormStats::read(BinaryReader& in) {
  NormStats s;
  s.x_mean[0] = in.f64();
  s.x_mean[1] = in.f64();
  s.x_std[0] = in.f64();
  s.x_std[1] = in.f64();
  s.y_mean = in.f64();
  s.y_std = in.f64();
  return s;
}

Dataset Dataset::slice(const std::vector<Eigen::Index>& rows) const {
  Dataset out;
  out.stats = stats;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.x.resize(n, 2);
  out.y.resize(n);
  if (r) out.r = Vector(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = rows[static_cast<std::size_t>(i)];
    out.x.row(i) = x.row(src);
    out.y(i) = y(src);
    if (r) (*out.r)(i) = (*r)(src);
  }
  return out;
}

Dataset make_dataset(const Points& world_x, const Vector& y,
                     const std::optional<Vector>& r) {
  if (world_x.rows() == 0) {
    fail(ErrorKind::kEmptyDataset, "dataset has no samples");
  }
  if (world_x.rows() != y.size() || (r && r->size() != y.size())) {
    fail(ErrorKind::kInvalidInput, "dataset column lengths differ");
  }
  Dataset d;
  d.stats = NormStats::fit(world_x, y);
  d.x = d.stats.normalize_points(world_x);
  d.y = d.stats.normalize_targets(y);
  if (r) d.r = d.stats.normalize_variances(*r);
  return d;
}

Dataset grid_to_dataset(const DemGrid& dem, const DemGrid* var_grid) {
  dem.validate();
  if (var_grid) {
    var_grid->validate();
    if (var_grid->ncols != dem.ncols || var_grid->nrows != dem.nrows) {
      fail(ErrorKind::kInvalidInput,
           "variance grid shape does not match elevation grid");
    }
  }
  std::vector<std::size_t> keep;
  keep.reserve(dem.size());
  for (std::size_t i = 0; i < dem.size(); ++i) {
    if (dem.is_nodata(dem.values[i])) continue;
    if (var_grid && var_grid->is_nodata(var_grid->values[i])) continue;
    keep.push_back(i);
  }
  if (keep.empty()) {
    fail(ErrorKind::kEmptyDataset, "all grid cells are nodata");
  }
  const auto n = static_cast<Eigen::Index>(keep.size());
  Points x(n, 2);
  Vector y(n);
  std::optional<Vector> r;
  if (var_grid) r = Vector(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::size_t i = keep[static_cast<std::size_t>(k)];
    x.row(k) = dem.cell_center(i / dem.ncols, i % dem.ncols);
    y(k) = dem.values[i];
    if (r) (*r)(k) = var_grid->values[i];
  }
  return make_dataset(x, y, r);
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  const Points world = data.stats.denormalize_points(data.x);
  const Vector y = data.stats.denormalize_targets(data.y);
  Vector r;
  if (data.r) r = data.stats.denormalize_variances(*data.r);
  out << "x,y,elevation,variance\n";
  char buf[128];
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (data.r) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", world(i, 0),
                    world(i, 1), y(i), r(i));
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,\n", world(i, 0),
                    world(i, 1), y(i));
    }
    out << buf;
  }
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

}  // namespace tgp
