#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tgp/metrics.hpp"
#include "tgp/methods.hpp"
#include "tgp/synth.hpp"

namespace tgp::cli {

namespace fs = std::filesystem;

struct SynthCommand {
  SynthParams params;
  NoiseMode noise_mode = NoiseMode::kShadow;
  fs::path out_dir = ".";
};

// Writes dem.asc, truth.asc, uncertainty.asc, prior.asc and train.asc.
SyntheticScene cmd_synth(const SynthCommand& cmd);

struct FitCommand {
  MethodId method = MethodId::kHayner;
  fs::path train;
  std::optional<fs::path> noise;
  std::optional<fs::path> prior;
  fs::path out = "model.tgp";
  // Defaults to <out>.loss.csv.
  std::optional<fs::path> loss_csv;
  std::optional<std::size_t> epochs;
  std::optional<double> learning_rate;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> inducing;
  std::optional<KernelFamily> kernel;
  std::optional<MaternNu> nu;
  std::uint64_t seed = 0;
};

// Applies the command-line overrides on top of the method defaults and
// reports each one on `log`.
MethodConfig resolve_config(const FitCommand& cmd, std::ostream* log);

TerrainModel cmd_fit(const FitCommand& cmd, std::ostream* log);

struct TargetGeometry {
  std::optional<fs::path> like;
  std::optional<std::size_t> ncols;
  std::optional<std::size_t> nrows;
  std::optional<double> xllcorner;
  std::optional<double> yllcorner;
  std::optional<double> cellsize;
};

// Geometry from a reference grid and/or explicit values. Explicit values that
// disagree with the reference grid are a config error.
DemGrid resolve_geometry(const TargetGeometry& geo);

struct PredictCommand {
  fs::path model;
  TargetGeometry target;
  fs::path out_dir = ".";
};

struct PredictionGrids {
  DemGrid mean;
  DemGrid var;
  DemGrid latent_var;
};

PredictionGrids predict_grid(const TerrainModel& model, const DemGrid& geometry);

// Writes mean.asc, var.asc and latent_var.asc.
PredictionGrids cmd_predict(const PredictCommand& cmd);

struct EvalCommand {
  fs::path mean;
  fs::path var;
  fs::path truth;
  fs::path report = "report.txt";
  std::optional<fs::path> curves;  // defaults to sparsification.csv beside the report
  // Latent variance grid; adds its NLPD to the report as a comment.
  std::optional<fs::path> latent_var;
  EvalOptions options;
};

// Evaluates on the cells that are valid in all three grids.
EvalReport evaluate_grids(const DemGrid& mean, const DemGrid& var, const DemGrid& truth,
                          const EvalOptions& options);

EvalReport cmd_eval(const EvalCommand& cmd);

struct SweepCommand {
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> inducing;
  SynthParams scene;
  NoiseMode noise_mode = NoiseMode::kShadow;
  std::optional<std::size_t> epochs;
  std::uint64_t seed = 0;
  fs::path out = "sweep.csv";
};

struct SweepRow {
  std::size_t n = 0;
  std::size_t m_inducing = 0;
  double rmse = 0.0;
  double wall_seconds = 0.0;
};

// Trains ours-variational for every (n, m) pair. The noise GP is fit once per
// n; only the terrain fit is timed.
std::vector<SweepRow> cmd_sweep(const SweepCommand& cmd, std::ostream* log);

void write_sweep_csv(const std::vector<SweepRow>& rows, const fs::path& path);

// Binary 8-bit PGM. Min-max scaled, nodata is 0, a constant grid is 128.
std::string render_pgm(const DemGrid& grid);

struct HeatmapCommand {
  fs::path input;
  fs::path out = "heatmap.pgm";
};

void cmd_heatmap(const HeatmapCommand& cmd);

struct HillshadeCommand {
  fs::path dem;
  double azimuth = 135.0;
  double elevation = 20.0;
  fs::path out = "hillshade.asc";
};

void cmd_hillshade(const HillshadeCommand& cmd);

// Parses argv, dispatches, and maps failures to exit codes: 0 success,
// 2 usage or config, 3 data/parse/io, 4 numerical.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tgp::cli
