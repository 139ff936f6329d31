#pragma once

#include <cstdint>
#include <variant>

#include "tgp/binary_io.hpp"
#include "tgp/dataset.hpp"
#include "tgp/exact_gp.hpp"
#include "tgp/svgp.hpp"
#include "tgp/types.hpp"

namespace tgp {

// Posterior log-variance is clamped to this range before exponentiation.
inline constexpr double kLogVarianceClamp = 20.0;

struct NoiseFitOptions {
  AdamConfig adam{.learning_rate = 0.1, .max_epochs = 50};
  // Stage 1 uses an exact GP up to this many samples, an SVGP above it.
  std::size_t exact_limit = 10000;
  std::size_t num_inducing = 1024;
  std::size_t batch_size = 256;
};

// Stage-1 GP g over log noise variance (RBF kernel, learned constant mean,
// learned homoscedastic noise sigma_zeta^2). It has no mutating operations:
// once fitted it is frozen.
class NoiseModel {
 public:
  using Body = std::variant<ExactGp, SvgpState>;

  explicit NoiseModel(Body gp) : gp_(std::move(gp)) {}

  // Posterior mean mu_g(x), clamped to [-20, 20].
  [[nodiscard]] Vector log_variance(const Points& x) const;
  // exp(mu_g(x)).
  [[nodiscard]] Vector variance(const Points& x) const;
  [[nodiscard]] const Body& gp() const { return gp_; }
  // sigma_zeta^2 learned by stage 1.
  [[nodiscard]] double log_target_noise() const;

  void write(BinaryWriter& out) const;
  static NoiseModel read(BinaryReader& in);

 private:
  Body gp_;
};

// Fits g on targets log r_i. Every r_i must be positive.
NoiseModel fit_noise_gp(const Points& x, const Vector& r,
                        const NoiseFitOptions& options, std::uint64_t seed,
                        const EpochCallback& on_epoch = {});

enum class TwoStageVariant : std::uint8_t { kExact = 0, kVariational = 1 };

struct TerrainPrediction {
  Vector mean;            // meters
  Vector latent_var;      // m^2, terrain posterior only
  Vector predictive_var;  // m^2, latent plus exp(mu_g)
};

struct TwoStageModel {
  NoiseModel noise;
  std::variant<ExactGp, SvgpState> terrain;
  TwoStageVariant variant = TwoStageVariant::kExact;
  NormStats stats;
  // exp(mu_g(X)) at the training inputs, normalized units; the fixed
  // likelihood variances stage 2 was trained with.
  Vector training_noise;

  void write(BinaryWriter& out) const;
  static TwoStageModel read(BinaryReader& in);
};

struct TerrainFitOptions {
  AdamConfig adam{.learning_rate = 0.1, .max_epochs = 30};
  KernelConfig kernel;
  MeanFunction mean = ZeroMean{};
  std::size_t num_inducing = 1024;  // variational only
};

// Stage 2: computes v_i = exp(mu_g(x_i)) once from the frozen noise model and
// fits the terrain GP with that fixed heteroscedastic likelihood.
TwoStageModel fit_terrain(const Dataset& data, NoiseModel noise,
                          TwoStageVariant variant,
                          const TerrainFitOptions& options, std::uint64_t seed,
                          const EpochCallback& on_epoch = {});

// Query points in world coordinates; outputs denormalized.
TerrainPrediction predict_terrain(const TwoStageModel& model,
                                  const Points& world_points);

}  // namespace tgp
