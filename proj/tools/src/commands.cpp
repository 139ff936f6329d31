#include "tgp/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <tuple>

#include "tgp/error.hpp"
#include "tgp/model_io.hpp"
#include "tgp/random.hpp"

namespace tgp::cli {
namespace {

constexpr Eigen::Index kPredictBlock = 4096;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create directory " + dir.string() + ": " + ec.message());
}

DemGrid with_values(const DemGrid& geometry, const Vector& v) {
  DemGrid g = geometry;
  g.values.assign(v.data(), v.data() + v.size());
  return g;
}

void write_text(const fs::path& path, const std::string& text, std::ios::openmode mode) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

}  // namespace

SyntheticScene cmd_synth(const SynthCommand& cmd) {
  SyntheticScene s = make_scene(cmd.params, cmd.noise_mode);
  ensure_dir(cmd.out_dir);
  write_asc(s.dem, cmd.out_dir / "dem.asc");
  write_asc(s.truth, cmd.out_dir / "truth.asc");
  write_asc(s.uncertainty, cmd.out_dir / "uncertainty.asc");
  write_asc(s.prior, cmd.out_dir / "prior.asc");
  write_asc(s.train, cmd.out_dir / "train.asc");
  return s;
}

MethodConfig resolve_config(const FitCommand& cmd, std::ostream* log) {
  MethodConfig cfg = MethodConfig::defaults(cmd.method);
  cfg.seed = cmd.seed;
  auto note = [&](const char* what, const std::string& from, const std::string& to) {
    if (log) *log << "override " << what << ": " << from << " -> " << to << "\n";
  };
  if (cmd.epochs) {
    note("epochs", std::to_string(cfg.adam.max_epochs), std::to_string(*cmd.epochs));
    cfg.adam.max_epochs = *cmd.epochs;
  }
  if (cmd.learning_rate) {
    if (!(*cmd.learning_rate > 0.0)) fail(ErrorKind::kInvalidConfig, "learning rate must be positive");
    note("lr", std::to_string(cfg.adam.learning_rate), std::to_string(*cmd.learning_rate));
    cfg.adam.learning_rate = *cmd.learning_rate;
  }
  if (cmd.batch_size) {
    if (!cfg.variational()) {
      fail(ErrorKind::kInvalidConfig, std::string(to_string(cfg.id)) + " trains full batch");
    }
    note("batch", std::to_string(cfg.adam.batch_size), std::to_string(*cmd.batch_size));
    cfg.adam.batch_size = *cmd.batch_size;
  }
  if (cmd.inducing) {
    if (!cfg.variational()) {
      fail(ErrorKind::kInvalidConfig, std::string(to_string(cfg.id)) + " has no inducing points");
    }
    note("inducing", std::to_string(cfg.num_inducing), std::to_string(*cmd.inducing));
    cfg.num_inducing = *cmd.inducing;
  }
  if (cmd.kernel) {
    note("kernel", to_string(cfg.kernel), to_string(*cmd.kernel));
    cfg.kernel = *cmd.kernel;
  }
  if (cmd.nu) cfg.nu = *cmd.nu;
  return cfg;
}

TerrainModel cmd_fit(const FitCommand& cmd, std::ostream* log) {
  const MethodConfig cfg = resolve_config(cmd, log);
  if (cfg.heteroscedastic() && !cmd.noise) {
    fail(ErrorKind::kInvalidConfig,
         std::string(to_string(cfg.id)) + " needs --noise (uncertainty grid)");
  }
  if (cfg.heteroscedastic() && !cmd.prior) {
    fail(ErrorKind::kInvalidConfig, std::string(to_string(cfg.id)) + " needs --prior");
  }
  const DemGrid train = read_asc(cmd.train);
  std::optional<DemGrid> noise;
  if (cfg.heteroscedastic()) noise = read_asc(*cmd.noise);
  std::optional<DemGrid> prior;
  if (cmd.prior) prior = read_asc(*cmd.prior);
  const Dataset data = grid_to_dataset(train, noise ? &*noise : nullptr);

  std::string loss_csv = "epoch,loss\n";
  char buf[64];
  const EpochCallback on_epoch = [&](std::size_t epoch, double loss) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", epoch, loss);
    loss_csv += buf;
  };
  if (log) {
    *log << "fitting " << to_string(cfg.id) << " (" << to_string(cfg.kernel) << ", lr "
         << cfg.adam.learning_rate << ", " << cfg.adam.max_epochs << " epochs) on "
         << data.size() << " points\n";
  }
  TerrainModel model = fit_method(cfg, data, prior ? &*prior : nullptr, on_epoch);
  save_model(model, cmd.out);
  const fs::path loss_path = cmd.loss_csv ? *cmd.loss_csv : fs::path(cmd.out.string() + ".loss.csv");
  write_text(loss_path, loss_csv, std::ios::out);
  return model;
}

DemGrid resolve_geometry(const TargetGeometry& geo) {
  DemGrid g;
  if (geo.like) {
    g = read_asc(*geo.like);
    auto check = [](bool same, const char* flag) {
      if (!same) {
        fail(ErrorKind::kInvalidConfig,
             std::string("geometry flag ") + flag + " disagrees with the reference grid");
      }
    };
    if (geo.ncols) check(*geo.ncols == g.ncols, "--ncols");
    if (geo.nrows) check(*geo.nrows == g.nrows, "--nrows");
    if (geo.xllcorner) check(*geo.xllcorner == g.xllcorner, "--xllcorner");
    if (geo.yllcorner) check(*geo.yllcorner == g.yllcorner, "--yllcorner");
    if (geo.cellsize) check(*geo.cellsize == g.cellsize, "--cellsize");
  } else {
    if (!geo.ncols || !geo.nrows || !geo.cellsize) {
      fail(ErrorKind::kInvalidConfig,
           "target geometry needs --like or all of --ncols, --nrows, --cellsize");
    }
    if (*geo.ncols == 0 || *geo.nrows == 0 || !(*geo.cellsize > 0.0)) {
      fail(ErrorKind::kInvalidConfig, "target geometry must be non-empty with positive cellsize");
    }
    g = DemGrid::filled(*geo.ncols, *geo.nrows, *geo.cellsize, 0.0,
                        geo.xllcorner.value_or(0.0), geo.yllcorner.value_or(0.0));
  }
  return g;
}

PredictionGrids predict_grid(const TerrainModel& model, const DemGrid& geometry) {
  const Points pts = geometry.cell_centers();
  const Eigen::Index n = pts.rows();
  Vector mean(n), var(n), latent(n);
  for (Eigen::Index start = 0; start < n; start += kPredictBlock) {
    const Eigen::Index len = std::min(kPredictBlock, n - start);
    const TerrainPrediction p = model.predict(pts.middleRows(start, len));
    mean.segment(start, len) = p.mean;
    var.segment(start, len) = p.predictive_var;
    latent.segment(start, len) = p.latent_var;
  }
  return {with_values(geometry, mean), with_values(geometry, var), with_values(geometry, latent)};
}

PredictionGrids cmd_predict(const PredictCommand& cmd) {
  const DemGrid geometry = resolve_geometry(cmd.target);
  const TerrainModel model = load_model(cmd.model);
  PredictionGrids out = predict_grid(model, geometry);
  ensure_dir(cmd.out_dir);
  write_asc(out.mean, cmd.out_dir / "mean.asc");
  write_asc(out.var, cmd.out_dir / "var.asc");
  write_asc(out.latent_var, cmd.out_dir / "latent_var.asc");
  return out;
}

EvalReport evaluate_grids(const DemGrid& mean, const DemGrid& var, const DemGrid& truth,
                          const EvalOptions& options) {
  if (!mean.same_geometry(truth) || !var.same_geometry(truth)) {
    fail(ErrorKind::kInvalidInput, "mean, variance and truth grids must share geometry");
  }
  std::vector<std::size_t> keep;
  keep.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!mean.is_nodata(mean.values[i]) && !var.is_nodata(var.values[i]) &&
        !truth.is_nodata(truth.values[i])) {
      keep.push_back(i);
    }
  }
  if (keep.empty()) fail(ErrorKind::kEmptyDataset, "no cell is valid in all three grids");
  const auto q = static_cast<Eigen::Index>(keep.size());
  Vector m(q), v(q), t(q);
  for (Eigen::Index k = 0; k < q; ++k) {
    m(k) = mean.values[keep[k]];
    v(k) = var.values[keep[k]];
    t(k) = truth.values[keep[k]];
  }
  return evaluate(m, v, t, options);
}

EvalReport cmd_eval(const EvalCommand& cmd) {
  const DemGrid mean = read_asc(cmd.mean);
  const DemGrid truth = read_asc(cmd.truth);
  EvalReport r = evaluate_grids(mean, read_asc(cmd.var), truth, cmd.options);
  if (cmd.latent_var) {
    r.nlpd_latent = evaluate_grids(mean, read_asc(*cmd.latent_var), truth, cmd.options).nlpd;
  }
  write_report(r, cmd.report);
  write_curves_csv(r, cmd.curves ? *cmd.curves
                                 : cmd.report.parent_path() / "sparsification.csv");
  return r;
}

std::vector<SweepRow> cmd_sweep(const SweepCommand& cmd, std::ostream* log) {
  if (cmd.sizes.empty() || cmd.inducing.empty()) {
    fail(ErrorKind::kInvalidConfig, "sweep needs at least one size and one inducing count");
  }
  std::vector<SweepRow> rows;
  for (const std::size_t n : cmd.sizes) {
    for (const std::size_t m : cmd.inducing) {
      if (m == 0 || m > n) {
        fail(ErrorKind::kInvalidConfig, "inducing count " + std::to_string(m) +
                                            " must lie in [1, " + std::to_string(n) + "]");
      }
    }
  }
  for (const std::size_t n : cmd.sizes) {
    // The train grid is the truth decimated by 2, so a truth side of
    // 2 * ceil(sqrt(n)) leaves at least n training cells.
    SynthParams sp = cmd.scene;
    sp.seed = cmd.seed;
    sp.size = kTrainFactor * static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    const double half = static_cast<double>(sp.size) / 2.0;
    sp.max_radius = std::min(sp.max_radius, half);
    sp.min_radius = std::min(sp.min_radius, sp.max_radius);
    const SyntheticScene scene = make_scene(sp, cmd.noise_mode);

    const Points centers = scene.train.cell_centers();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(centers.rows()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    Rng rng = make_rng(cmd.seed, streams::kInit);
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    Points x(static_cast<Eigen::Index>(n), 2);
    Vector y(static_cast<Eigen::Index>(n));
    Vector r(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(idx[i]);
      x.row(static_cast<Eigen::Index>(i)) = centers.row(idx[i]);
      y(static_cast<Eigen::Index>(i)) = scene.train.values[k];
      r(static_cast<Eigen::Index>(i)) = scene.uncertainty.values[k];
    }
    const Dataset data = make_dataset(x, y, r);

    MethodConfig base = MethodConfig::defaults(MethodId::kOursVariational);
    base.seed = cmd.seed;
    if (cmd.epochs) base.adam.max_epochs = *cmd.epochs;
    if (log) *log << "n=" << n << ": fitting noise GP\n";
    const NoiseModel noise = fit_noise_gp(data.x, *data.r, base.noise_fit, base.seed);

    const Points truth_pts = scene.truth.cell_centers();
    const Vector truth = Eigen::Map<const Vector>(scene.truth.values.data(),
                                                  static_cast<Eigen::Index>(scene.truth.size()));
    for (const std::size_t m : cmd.inducing) {
      MethodConfig cfg = base;
      cfg.num_inducing = m;
      const auto t0 = std::chrono::steady_clock::now();
      const TerrainModel model = fit_two_stage(cfg, data, scene.prior, noise);
      const auto t1 = std::chrono::steady_clock::now();
      const PredictionGrids pred = predict_grid(model, scene.truth);
      const Vector mean = Eigen::Map<const Vector>(pred.mean.values.data(), truth.size());
      SweepRow row{n, m, rmse(mean, truth), std::chrono::duration<double>(t1 - t0).count()};
      if (log) {
        *log << "n=" << n << " m=" << m << " rmse=" << row.rmse
             << " wall=" << row.wall_seconds << "s\n";
      }
      rows.push_back(row);
    }
  }
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.n, a.m_inducing) < std::tie(b.n, b.m_inducing);
  });
  write_sweep_csv(rows, cmd.out);
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const fs::path& path) {
  std::string text = "n,m_inducing,rmse,wall_seconds\n";
  char buf[128];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.17g\n", r.n, r.m_inducing, r.rmse,
                  r.wall_seconds);
    text += buf;
  }
  write_text(path, text, std::ios::out);
}

std::string render_pgm(const DemGrid& grid) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const double v : grid.values) {
    if (grid.is_nodata(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::string out = "P5\n" + std::to_string(grid.ncols) + " " + std::to_string(grid.nrows) +
                    "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + grid.values.size());
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    const double v = grid.values[i];
    int level = 0;
    if (!grid.is_nodata(v)) {
      level = hi > lo ? static_cast<int>(std::lround(255.0 * (v - lo) / (hi - lo))) : 128;
    }
    out[header + i] = static_cast<char>(static_cast<unsigned char>(level));
  }
  return out;
}

void cmd_heatmap(const HeatmapCommand& cmd) {
  write_text(cmd.out, render_pgm(read_asc(cmd.input)), std::ios::out | std::ios::binary);
}

void cmd_hillshade(const HillshadeCommand& cmd) {
  write_asc(hillshade(read_asc(cmd.dem), cmd.azimuth, cmd.elevation), cmd.out);
}

}  // namespace tgp::cli
