#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tgp/binary_io.hpp"
#include "tgp/dataset.hpp"
#include "tgp/exact_gp.hpp"
#include "tgp/kernels.hpp"
#include "tgp/mean_function.hpp"
#include "tgp/optim.hpp"
#include "tgp/types.hpp"

namespace tgp {

// Sparse variational GP in the unwhitened parameterization.
//
// q(u) = N(m(Z) + q_mean, S) with S = q_chol * q_chol^T, prior
// p(u) = N(m(Z), Kzz). q_mean is therefore an offset from the prior mean at
// the inducing inputs.
//
// pack() layout: inducing coordinates (z0x, z0y, z1x, ...), q_mean, the lower
// triangle of q_chol column by column with log-diagonal entries, kernel
// log-hyperparameters, constant mean (if learned), log noise (if
// homoscedastic).
struct SvgpState {
  Points inducing;
  Vector q_mean;
  Matrix q_chol;
  KernelConfig kernel;
  MeanFunction mean = ZeroMean{};
  // Homoscedastic Gaussian likelihood when set; otherwise the caller supplies
  // per-point noise variances.
  std::optional<double> log_noise;

  [[nodiscard]] Eigen::Index num_inducing() const { return inducing.rows(); }
  void validate() const;

  [[nodiscard]] Vector pack() const;
  void unpack(const Vector& theta);
  [[nodiscard]] std::vector<std::string> names() const;

  void write(BinaryWriter& out) const;
  static SvgpState read(BinaryReader& in);
};

// m distinct rows of x, drawn without replacement from the inducing-init
// stream of `seed`.
Points init_inducing(const Points& x, std::size_t m, std::uint64_t seed);

// Marginal q(f) at xstar. With clamp=false the raw variance is returned so
// that roundoff below zero can be inspected.
Prediction predictive_qf(const SvgpState& state, const Points& xstar,
                         bool clamp = true);

// E_{N(f | mean, var)}[log N(y | f, noise_var)] in closed form.
double expected_loglik(double mean, double var, double y, double noise_var);

// KL[q(u) || p(u)].
double kl_term(const SvgpState& state);

struct ElboResult {
  double value = 0.0;
  Vector gradient;  // pack() order; empty when not requested
};

// (n_total / b) * sum_i E[log p(y_i | f_i)] - KL. `batch_noise` supplies
// per-point variances for the batch; when null the state's homoscedastic
// noise is used.
ElboResult elbo_minibatch(const SvgpState& state, const Points& xb,
                          const Vector& yb, std::size_t n_total,
                          const Vector* batch_noise = nullptr,
                          bool with_gradient = true);

struct SvgpFitOptions {
  AdamConfig adam;
  std::size_t num_inducing = 1024;
  KernelConfig kernel;
  MeanFunction mean = ZeroMean{};
  // Initial homoscedastic log noise; ignored when per-point noise is given.
  double init_log_noise = 0.0;
  double init_q_scale = 0.1;
};

// Mini-batch Adam on -ELBO / n over every parameter, inducing locations
// included. Batches come from a fresh seeded shuffle each epoch; the last
// short batch is kept. `noise`, when given, holds fixed per-point variances
// for data (normalized units) and makes the likelihood heteroscedastic.
SvgpState fit_svgp(const Dataset& data, const SvgpFitOptions& options,
                   std::uint64_t seed, const Vector* noise = nullptr,
                   const EpochCallback& on_epoch = {});

}  // namespace tgp
