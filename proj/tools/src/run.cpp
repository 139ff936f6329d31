#include <CLI11.hpp>

#include <filesystem>
#include <stdexcept>

#include "tgp/cli/commands.hpp"
#include "tgp/error.hpp"

namespace tgp::cli {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidConfig: return kExitUsage;
    case ErrorKind::kInvalidInput:
    case ErrorKind::kParse:
    case ErrorKind::kIo:
    case ErrorKind::kEmptyDataset: return kExitData;
    case ErrorKind::kIllConditioned:
    case ErrorKind::kTrainingDivergence: return kExitNumeric;
  }
  return kExitData;
}

MaternNu parse_nu(const std::string& s) {
  if (s == "0.5" || s == "1/2") return MaternNu::kHalf;
  if (s == "1.5" || s == "3/2") return MaternNu::kThreeHalves;
  if (s == "2.5" || s == "5/2") return MaternNu::kFiveHalves;
  fail(ErrorKind::kInvalidConfig, "Matern nu must be 0.5, 1.5 or 2.5");
}

void add_scene_flags(CLI::App* cmd, SynthParams& p, std::string& mode) {
  cmd->add_option("--size", p.size, "Truth grid side in cells")->capture_default_str();
  cmd->add_option("--cellsize", p.cellsize, "Truth cell size (m)")->capture_default_str();
  cmd->add_option("--roughness", p.roughness, "Spectral exponent of the fractal base")
      ->capture_default_str();
  cmd->add_option("--amplitude", p.amplitude, "Std of the fractal base (m)")->capture_default_str();
  cmd->add_option("--craters", p.craters, "Number of random craters")->capture_default_str();
  cmd->add_option("--min-radius", p.min_radius, "Smallest crater radius (cells)")
      ->capture_default_str();
  cmd->add_option("--max-radius", p.max_radius, "Largest crater radius (cells)")
      ->capture_default_str();
  cmd->add_option("--depth-ratio", p.depth_ratio, "Crater depth / diameter")->capture_default_str();
  cmd->add_option("--rim-fraction", p.rim_fraction, "Rim height / crater depth")
      ->capture_default_str();
  cmd->add_option("--sun-azimuth", p.sun_azimuth, "Degrees clockwise from north")
      ->capture_default_str();
  cmd->add_option("--sun-elevation", p.sun_elevation, "Degrees above the horizon")
      ->capture_default_str();
  cmd->add_option("--var-dark", p.var_dark, "Noise variance in full shadow (m^2)")
      ->capture_default_str();
  cmd->add_option("--var-lit", p.var_lit, "Noise variance in full light (m^2)")
      ->capture_default_str();
  cmd->add_option("--noise-mode", mode, "shadow: from hillshade; split: var-lit west, var-dark east")
      ->check(CLI::IsMember({"shadow", "split"}))
      ->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stage heteroscedastic GP terrain mapping", "tgp"};
  app.require_subcommand(1);

  SynthCommand synth;
  std::string synth_mode = "shadow";
  auto* s = app.add_subcommand("synth", "Generate a synthetic scene");
  add_scene_flags(s, synth.params, synth_mode);
  s->add_option("--seed", synth.params.seed, "Random seed")->capture_default_str();
  s->add_option("--out-dir", synth.out_dir, "Output directory")->capture_default_str();

  FitCommand fit;
  std::string method, kernel, nu;
  std::size_t epochs = 0, batch = 0, inducing = 0;
  double lr = 0.0;
  std::string loss_csv, noise_path, prior_path;
  auto* f = app.add_subcommand("fit", "Train a terrain model");
  f->add_option("--method", method, "tomita | hayner | torroba | ours-exact | ours-variational")
      ->required();
  f->add_option("--train", fit.train, "Training DEM (.asc)")->required();
  auto* f_noise = f->add_option("--noise", noise_path, "Noise variance grid (.asc)");
  auto* f_prior = f->add_option("--prior", prior_path, "Low-resolution prior DEM (.asc)");
  f->add_option("--out", fit.out, "Model file")->capture_default_str();
  auto* f_loss = f->add_option("--loss-csv", loss_csv, "Per-epoch loss (default <out>.loss.csv)");
  auto* f_epochs = f->add_option("--epochs", epochs, "Override training epochs");
  auto* f_lr = f->add_option("--lr", lr, "Override learning rate");
  auto* f_batch = f->add_option("--batch-size", batch, "Override mini-batch size");
  auto* f_inducing = f->add_option("--inducing", inducing, "Override inducing point count");
  auto* f_kernel = f->add_option("--kernel", kernel, "Override kernel: rbf | rq | absexp | matern");
  auto* f_nu = f->add_option("--nu", nu, "Matern smoothness: 0.5 | 1.5 | 2.5");
  f->add_option("--seed", fit.seed, "Random seed")->capture_default_str();

  PredictCommand predict;
  std::string like;
  std::size_t ncols = 0, nrows = 0;
  double xll = 0.0, yll = 0.0, cellsize = 0.0;
  auto* p = app.add_subcommand("predict", "Predict on a target grid");
  p->add_option("--model", predict.model, "Model file")->required();
  auto* p_like = p->add_option("--like", like, "Take the target geometry from this grid");
  auto* p_ncols = p->add_option("--ncols", ncols);
  auto* p_nrows = p->add_option("--nrows", nrows);
  auto* p_xll = p->add_option("--xllcorner", xll);
  auto* p_yll = p->add_option("--yllcorner", yll);
  auto* p_cs = p->add_option("--cellsize", cellsize);
  p->add_option("--out-dir", predict.out_dir, "Output directory")->capture_default_str();

  EvalCommand eval;
  std::string curves, latent_var;
  auto* e = app.add_subcommand("eval", "Score predictions against ground truth");
  e->add_option("--mean", eval.mean, "Predicted mean grid")->required();
  e->add_option("--var", eval.var, "Predicted variance grid")->required();
  e->add_option("--truth", eval.truth, "Ground-truth grid")->required();
  e->add_option("--report", eval.report, "metric=value report")->capture_default_str();
  auto* e_curves = e->add_option("--curves", curves, "Sparsification CSV");
  auto* e_latent = e->add_option("--latent-var", latent_var,
                                 "Latent variance grid; its NLPD is added as a report comment");
  e->add_flag("--ause-normalized", eval.options.ause_normalized,
              "Divide sparsification curves by the full MAE");
  e->add_option("--variance-kind", eval.options.variance_kind,
                "Label recorded in the report for the variance grid")
      ->capture_default_str();

  SweepCommand sweep;
  std::string sweep_mode = "shadow";
  std::size_t sweep_epochs = 0;
  auto* w = app.add_subcommand("sweep", "Inducing-point count vs accuracy and time");
  w->add_option("--sizes", sweep.sizes, "Training set sizes")->delimiter(',')->required();
  w->add_option("--inducing", sweep.inducing, "Inducing point counts")->delimiter(',')->required();
  add_scene_flags(w, sweep.scene, sweep_mode);
  auto* w_epochs = w->add_option("--epochs", sweep_epochs, "Override training epochs");
  w->add_option("--seed", sweep.seed, "Random seed")->capture_default_str();
  w->add_option("--out", sweep.out, "Output CSV")->capture_default_str();

  HeatmapCommand heat;
  auto* h = app.add_subcommand("heatmap", "Render a grid as an 8-bit PGM");
  h->add_option("--input", heat.input, "Input grid (.asc)")->required();
  h->add_option("--out", heat.out, "Output .pgm")->capture_default_str();

  HillshadeCommand shade;
  auto* hs = app.add_subcommand("hillshade", "Lambertian hillshade of a DEM");
  hs->add_option("--dem", shade.dem, "Input DEM (.asc)")->required();
  hs->add_option("--azimuth", shade.azimuth, "Sun azimuth, degrees clockwise from north")
      ->capture_default_str();
  hs->add_option("--elevation", shade.elevation, "Sun elevation, degrees")->capture_default_str();
  hs->add_option("--out", shade.out, "Output .asc")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*s) {
      synth.noise_mode = parse_noise_mode(synth_mode);
      cmd_synth(synth);
    } else if (*f) {
      fit.method = parse_method(method);
      if (*f_noise) fit.noise = noise_path;
      if (*f_prior) fit.prior = prior_path;
      if (*f_loss) fit.loss_csv = loss_csv;
      if (*f_epochs) fit.epochs = epochs;
      if (*f_lr) fit.learning_rate = lr;
      if (*f_batch) fit.batch_size = batch;
      if (*f_inducing) fit.inducing = inducing;
      if (*f_kernel) fit.kernel = parse_kernel_family(kernel);
      if (*f_nu) fit.nu = parse_nu(nu);
      cmd_fit(fit, &err);
    } else if (*p) {
      if (*p_like) predict.target.like = like;
      if (*p_ncols) predict.target.ncols = ncols;
      if (*p_nrows) predict.target.nrows = nrows;
      if (*p_xll) predict.target.xllcorner = xll;
      if (*p_yll) predict.target.yllcorner = yll;
      if (*p_cs) predict.target.cellsize = cellsize;
      cmd_predict(predict);
    } else if (*e) {
      if (*e_curves) eval.curves = curves;
      if (*e_latent) eval.latent_var = latent_var;
      out << format_report(cmd_eval(eval));
    } else if (*w) {
      sweep.noise_mode = parse_noise_mode(sweep_mode);
      if (*w_epochs) sweep.epochs = sweep_epochs;
      cmd_sweep(sweep, &err);
    } else if (*h) {
      cmd_heatmap(heat);
    } else if (*hs) {
      cmd_hillshade(shade);
    }
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_code(ex.kind());
  } catch (const std::filesystem::filesystem_error& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitData;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace tgp::cli
