#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "tgp/dataset.hpp"
#include "tgp/exact_gp.hpp"
#include "tgp/grid.hpp"
#include "tgp/kernels.hpp"
#include "tgp/optim.hpp"
#include "tgp/svgp.hpp"
#include "tgp/two_stage.hpp"

namespace tgp {

// The five terrain-mapping configurations: three homoscedastic baselines and
// the exact and variational two-stage models.
enum class MethodId : std::uint8_t {
  kTomita = 0,
  kHayner = 1,
  kTorroba = 2,
  kOursExact = 3,
  kOursVariational = 4,
};

const char* to_string(MethodId id);
MethodId parse_method(const std::string& name);

struct MethodConfig {
  MethodId id = MethodId::kHayner;
  KernelFamily kernel = KernelFamily::kRbf;
  MaternNu nu = MaternNu::kFiveHalves;
  AdamConfig adam;
  std::size_t num_inducing = 0;  // variational methods only
  std::uint64_t seed = 0;
  NoiseFitOptions noise_fit;     // stage 1, two-stage methods only

  // Training parameters per method:
  //   tomita            AbsExp  lr 0.1   40 epochs  full batch
  //   hayner            RBF     lr 0.1   50 epochs  full batch
  //   ours-exact        RQ      lr 0.1   30 epochs  full batch
  //   torroba           Matern  lr 0.1   75 epochs  batch 256, 1024 inducing
  //   ours-variational  RQ      lr 0.05  40 epochs  batch 256, 1024 inducing
  static MethodConfig defaults(MethodId id);

  [[nodiscard]] bool heteroscedastic() const;
  [[nodiscard]] bool variational() const;

  void write(BinaryWriter& out) const;
  static MethodConfig read(BinaryReader& in);
};

// Initial value of every positive kernel/noise hyperparameter.
inline constexpr double kInitialHyperparameter = 0.6931471805599453;

// A fitted model of any method, with the statistics that map its normalized
// outputs back to meters.
struct TerrainModel {
  MethodConfig config;
  NormStats stats;
  std::variant<ExactGp, SvgpState, TwoStageModel> body;

  // World-coordinate queries. For homoscedastic models the predictive
  // variance adds the learned scalar noise.
  [[nodiscard]] TerrainPrediction predict(const Points& world_points) const;
};

// Fits `config` on a normalized dataset. Two-stage methods need data.r (noise
// variances) and a low-resolution prior raster for their mean function.
TerrainModel fit_method(const MethodConfig& config, const Dataset& data,
                        const DemGrid* prior,
                        const EpochCallback& on_epoch = {});

// Stage 2 of a two-stage method with an already fitted noise model.
TerrainModel fit_two_stage(const MethodConfig& config, const Dataset& data,
                           const DemGrid& prior, NoiseModel noise,
                           const EpochCallback& on_epoch = {});

// Kernel of `config`'s family with every hyperparameter at its initial value.
KernelConfig initial_kernel(const MethodConfig& config);

}  // namespace tgp
