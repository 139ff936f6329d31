#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "tgp/binary_io.hpp"
#include "tgp/dataset.hpp"
#include "tgp/kernels.hpp"
#include "tgp/linalg.hpp"
#include "tgp/mean_function.hpp"
#include "tgp/optim.hpp"
#include "tgp/types.hpp"

namespace tgp {

// Lower bound on a learned homoscedastic noise variance (normalized units).
inline constexpr double kNoiseFloor = 1e-6;

struct HomoscedasticNoise {
  double log_variance = 0.0;
  bool learnable = true;
};

// Known per-training-point variances; never optimized.
struct FixedNoise {
  Vector variances;
};

using NoiseSpec = std::variant<HomoscedasticNoise, FixedNoise>;

// Everything the exact marginal likelihood depends on besides the data.
// pack()/unpack() expose the optimizable subset in a fixed order:
// kernel log-hyperparameters, constant mean (if learned), log noise (if
// learned).
struct ExactHyperparameters {
  KernelConfig kernel;
  MeanFunction mean = ZeroMean{};
  NoiseSpec noise = HomoscedasticNoise{};

  [[nodiscard]] Vector pack() const;
  void unpack(const Vector& theta);
  [[nodiscard]] std::vector<std::string> names() const;
  [[nodiscard]] Vector noise_variances(Eigen::Index n) const;
};

struct LmlResult {
  double value = 0.0;
  Vector gradient;  // in pack() order
};

double log_marginal_likelihood(const Points& x, const Vector& y,
                               const ExactHyperparameters& hp);

LmlResult lml_gradients(const Points& x, const Vector& y,
                        const ExactHyperparameters& hp);

// Exact GP posterior with cached Cholesky factor of K + diag(noise) and the
// solve a = (K + diag(noise))^{-1} (Y - m(X)). Immutable once built.
class ExactGp {
 public:
  ExactGp(Points x, Vector y, ExactHyperparameters hp);

  // Latent posterior (observation noise excluded), variance clamped at 0.
  [[nodiscard]] Prediction predict(const Points& xstar) const;

  [[nodiscard]] const Points& inputs() const { return x_; }
  [[nodiscard]] const Vector& targets() const { return y_; }
  [[nodiscard]] const ExactHyperparameters& hyperparameters() const { return hp_; }
  [[nodiscard]] const KernelConfig& kernel() const { return hp_.kernel; }
  [[nodiscard]] const MeanFunction& mean() const { return hp_.mean; }
  [[nodiscard]] Vector noise_variances() const;
  [[nodiscard]] double jitter() const { return chol_.jitter; }
  [[nodiscard]] const Vector& solve_vector() const { return alpha_; }
  [[nodiscard]] double log_marginal_likelihood() const;

  void write(BinaryWriter& out) const;
  static ExactGp read(BinaryReader& in);

 private:
  Points x_;
  Vector y_;
  ExactHyperparameters hp_;
  JitteredCholesky chol_;
  Vector alpha_;
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

// Full-batch Adam on -LML / n for adam.max_epochs steps, starting from
// `init`. Fixed noise stays fixed; a learnable homoscedastic noise is
// projected onto the noise floor after every step.
ExactGp fit_exact(const Dataset& data, const ExactHyperparameters& init,
                  const AdamConfig& adam, const EpochCallback& on_epoch = {});

void write_noise(BinaryWriter& out, const NoiseSpec& noise);
NoiseSpec read_noise(BinaryReader& in);
void write_kernel(BinaryWriter& out, const KernelConfig& k);
KernelConfig read_kernel(BinaryReader& in);

}  // namespace tgp
