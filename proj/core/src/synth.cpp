#include "tgp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "tgp/error.hpp"
#include "tgp/random.hpp"

namespace tgp {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxWaveNumber = 32;

double deg2rad(double d) { return d * kPi / 180.0; }

void add_fractal_base(DemGrid& g, const SynthParams& p, Rng& rng) {
  const int n = static_cast<int>(p.size);
  const int kmax = std::max(1, std::min(n / 2, kMaxWaveNumber));
  const int nk = 2 * kmax + 1;
  std::normal_distribution<double> normal(0.0, 1.0);

  using Complex = std::complex<double>;
  using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
  CMatrix coeff = CMatrix::Zero(nk, nk);
  for (int ky = -kmax; ky <= kmax; ++ky) {
    for (int kx = -kmax; kx <= kmax; ++kx) {
      const double re = normal(rng);
      const double im = normal(rng);
      if (kx == 0 && ky == 0) continue;
      const double k = std::hypot(static_cast<double>(kx), static_cast<double>(ky));
      const double amp = std::pow(k, -0.5 * p.roughness);
      coeff(ky + kmax, kx + kmax) = Complex(re, im) * amp;
    }
  }
  CMatrix ey(n, nk);
  CMatrix ex(n, nk);
  for (int i = 0; i < n; ++i) {
    for (int k = -kmax; k <= kmax; ++k) {
      const double phase = 2.0 * kPi * k * i / n;
      ey(i, k + kmax) = std::polar(1.0, phase);
      ex(i, k + kmax) = std::polar(1.0, phase);
    }
  }
  const Matrix field = (ey * coeff * ex.transpose()).real();
  const double mean = field.mean();
  const double sd = std::sqrt((field.array() - mean).square().mean());
  const double scale = sd > 0.0 ? p.amplitude / sd : 0.0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) g.at(r, c) += (field(r, c) - mean) * scale;
  }
}

// Parabolic bowl inside the radius, cosine-tapered raised rim out to 1.5 R.
void add_crater(DemGrid& g, const Crater& cr, const SynthParams& p) {
  const double depth = p.depth_ratio * 2.0 * cr.radius * p.cellsize;
  const double rim = p.rim_fraction * depth;
  const double reach = 1.5 * cr.radius;
  const auto lo_r = static_cast<long>(std::max(0.0, std::floor(cr.row - reach)));
  const auto hi_r = static_cast<long>(std::min<double>(g.nrows - 1, std::ceil(cr.row + reach)));
  const auto lo_c = static_cast<long>(std::max(0.0, std::floor(cr.col - reach)));
  const auto hi_c = static_cast<long>(std::min<double>(g.ncols - 1, std::ceil(cr.col + reach)));
  for (long r = lo_r; r <= hi_r; ++r) {
    for (long c = lo_c; c <= hi_c; ++c) {
      const double t = std::hypot(r - cr.row, c - cr.col) / cr.radius;
      double dz = 0.0;
      if (t < 1.0) {
        dz = -depth + (depth + rim) * t * t;
      } else if (t < 1.5) {
        dz = rim * 0.5 * (1.0 + std::cos(kPi * (t - 1.0) / 0.5));
      }
      g.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) += dz;
    }
  }
}

void require_same_shape(const DemGrid& a, const DemGrid& b, const char* what) {
  if (a.ncols != b.ncols || a.nrows != b.nrows) {
    fail(ErrorKind::kInvalidInput, std::string(what) + ": grid shapes differ (" +
                                       std::to_string(a.ncols) + "x" + std::to_string(a.nrows) +
                                       " vs " + std::to_string(b.ncols) + "x" +
                                       std::to_string(b.nrows) + ")");
  }
}

}  // namespace

void SynthParams::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorKind::kInvalidConfig, msg); };
  if (size < 2) bad("size must be at least 2");
  if (!(cellsize > 0.0) || !std::isfinite(cellsize)) bad("cellsize must be positive");
  if (!(roughness >= 0.0) || !std::isfinite(roughness)) bad("roughness must be non-negative");
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) bad("amplitude must be non-negative");
  const double half = static_cast<double>(size) / 2.0;
  if (craters > 0) {
    if (!(min_radius > 0.0) || !(max_radius >= min_radius)) {
      bad("crater radius range must satisfy 0 < min <= max");
    }
    if (max_radius > half) bad("crater radius range must fit within the grid");
  }
  for (const Crater& c : fixed_craters) {
    if (!(c.radius > 0.0) || c.radius > half) bad("fixed crater radius must fit within the grid");
  }
  if (!(depth_ratio >= 0.0) || !(rim_fraction >= 0.0)) bad("crater shape ratios must be non-negative");
  if (!(sun_elevation > 0.0 && sun_elevation <= 90.0)) bad("sun elevation must lie in (0, 90]");
  if (!std::isfinite(sun_azimuth)) bad("sun azimuth must be finite");
  if (!(var_lit >= 0.0) || !(var_dark >= var_lit)) bad("need 0 <= var_lit <= var_dark");
}

DemGrid synth_terrain(const SynthParams& params) {
  params.validate();
  DemGrid g = DemGrid::filled(params.size, params.size, params.cellsize, 0.0);
  Rng rng = make_rng(params.seed, streams::kSynth);
  if (params.amplitude > 0.0) add_fractal_base(g, params, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < params.craters; ++i) {
    Crater c;
    c.row = unit(rng) * static_cast<double>(params.size);
    c.col = unit(rng) * static_cast<double>(params.size);
    c.radius = params.min_radius + unit(rng) * (params.max_radius - params.min_radius);
    add_crater(g, c, params);
  }
  for (const Crater& c : params.fixed_craters) add_crater(g, c, params);
  return g;
}

DemGrid hillshade(const DemGrid& dem, double azimuth_deg, double elevation_deg) {
  if (dem.ncols < 2 || dem.nrows < 2) {
    fail(ErrorKind::kInvalidInput, "hillshade needs at least 2x2 cells");
  }
  if (!(elevation_deg > 0.0 && elevation_deg <= 90.0)) {
    fail(ErrorKind::kInvalidConfig, "sun elevation must lie in (0, 90]");
  }
  const double az = deg2rad(azimuth_deg);
  const double el = deg2rad(elevation_deg);
  const double sx = std::sin(az) * std::cos(el);
  const double sy = std::cos(az) * std::cos(el);
  const double sz = std::sin(el);

  DemGrid out = dem;
  const std::size_t nr = dem.nrows;
  const std::size_t nc = dem.ncols;
  auto value = [&](std::size_t r, std::size_t c, double fallback) {
    const double v = dem.at(r, c);
    return dem.is_nodata(v) ? fallback : v;
  };
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) {
      const double z = dem.at(r, c);
      if (dem.is_nodata(z)) continue;
      const std::size_t c0 = c == 0 ? 0 : c - 1;
      const std::size_t c1 = c + 1 == nc ? c : c + 1;
      const std::size_t r0 = r == 0 ? 0 : r - 1;
      const std::size_t r1 = r + 1 == nr ? r : r + 1;
      const double dzdx = (value(r, c1, z) - value(r, c0, z)) /
                          (static_cast<double>(c1 - c0) * dem.cellsize);
      // Rows run north to south, so y grows toward r0.
      const double dzdy = (value(r0, c, z) - value(r1, c, z)) /
                          (static_cast<double>(r1 - r0) * dem.cellsize);
      const double norm = std::sqrt(dzdx * dzdx + dzdy * dzdy + 1.0);
      const double shade = (-dzdx * sx - dzdy * sy + sz) / norm;
      out.at(r, c) = std::clamp(shade, 0.0, 1.0);
    }
  }
  return out;
}

DemGrid shadow_uncertainty(const DemGrid& shade, double var_dark, double var_lit) {
  if (!(var_lit >= 0.0) || !(var_dark >= var_lit)) {
    fail(ErrorKind::kInvalidConfig, "need 0 <= var_lit <= var_dark");
  }
  DemGrid out = shade;
  for (double& v : out.values) {
    if (shade.is_nodata(v)) continue;
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::kInvalidInput, "shade values must lie in [0, 1]");
    v = var_lit + (var_dark - var_lit) * (1.0 - v);
  }
  return out;
}

DemGrid split_uncertainty(const DemGrid& like, double var_left, double var_right) {
  if (!(var_left >= 0.0) || !(var_right >= 0.0)) {
    fail(ErrorKind::kInvalidConfig, "variances must be non-negative");
  }
  DemGrid out = like;
  for (std::size_t r = 0; r < out.nrows; ++r) {
    for (std::size_t c = 0; c < out.ncols; ++c) {
      out.at(r, c) = c < out.ncols / 2 ? var_left : var_right;
    }
  }
  return out;
}

DemGrid inject_noise(const DemGrid& dem, const DemGrid& var_grid, std::uint64_t seed) {
  require_same_shape(dem, var_grid, "inject_noise");
  Rng rng = make_rng(seed, streams::kNoiseInject);
  std::normal_distribution<double> normal(0.0, 1.0);
  DemGrid out = dem;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double var = var_grid.values[i];
    if (var_grid.is_nodata(var) || dem.is_nodata(dem.values[i])) continue;
    if (!(var >= 0.0)) {
      fail(ErrorKind::kInvalidInput, "negative noise variance at cell " + std::to_string(i));
    }
    const double draw = normal(rng);
    if (var > 0.0) out.values[i] += std::sqrt(var) * draw;
  }
  return out;
}

NoiseMode parse_noise_mode(std::string_view name) {
  if (name == "shadow") return NoiseMode::kShadow;
  if (name == "split") return NoiseMode::kSplit;
  fail(ErrorKind::kInvalidConfig, "unknown noise mode '" + std::string(name) + "'");
}

SyntheticScene make_scene(const SynthParams& params, NoiseMode mode) {
  SyntheticScene s;
  s.truth = synth_terrain(params);
  const DemGrid var = mode == NoiseMode::kShadow
                          ? shadow_uncertainty(hillshade(s.truth, params.sun_azimuth,
                                                         params.sun_elevation),
                                               params.var_dark, params.var_lit)
                          : split_uncertainty(s.truth, params.var_lit, params.var_dark);
  s.dem = inject_noise(s.truth, var, params.seed);
  s.train = downsample(s.dem, kTrainFactor);
  s.uncertainty = downsample(var, kTrainFactor);
  s.prior = downsample(s.truth, kPriorFactor);
  return s;
}

}  // namespace tgp
