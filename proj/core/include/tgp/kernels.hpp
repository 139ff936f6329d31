#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tgp/types.hpp"

namespace tgp {

enum class KernelFamily : std::uint8_t {
  kRbf = 0,
  kRationalQuadratic = 1,
  kAbsoluteExponential = 2,
  kMatern = 3,
};

// Matern smoothness, restricted to the half-integer closed forms.
enum class MaternNu : std::uint8_t {
  kHalf = 0,
  kThreeHalves = 1,
  kFiveHalves = 2,
};

const char* to_string(KernelFamily family);
KernelFamily parse_kernel_family(const std::string& name);

// Scaled stationary kernel sigma_s^2 * k_base(x, x'). Positive hyperparameters
// are held as logarithms so that unconstrained optimizer steps stay valid.
struct KernelConfig {
  KernelFamily family = KernelFamily::kRbf;
  MaternNu nu = MaternNu::kFiveHalves;
  double log_lengthscale = 0.0;
  double log_outputscale = 0.0;
  double log_alpha = 0.0;  // rational quadratic only

  static KernelConfig make(KernelFamily family, double lengthscale,
                           double outputscale, double alpha = 1.0,
                           MaternNu nu = MaternNu::kFiveHalves);

  [[nodiscard]] double lengthscale() const;
  [[nodiscard]] double outputscale() const;
  [[nodiscard]] double alpha() const;

  // Number of optimizable log-hyperparameters: {log l, log sigma_s^2} plus
  // log alpha for the rational quadratic family.
  [[nodiscard]] std::size_t num_hyperparameters() const;
  [[nodiscard]] Vector hyperparameters() const;
  void set_hyperparameters(const Vector& values);
  [[nodiscard]] std::vector<std::string> hyperparameter_names() const;

  bool operator==(const KernelConfig&) const = default;
};

// Value of the kernel plus the pieces needed for analytic derivatives, all at
// one squared distance r2.
struct RadialTerms {
  double value = 0.0;
  double d_log_lengthscale = 0.0;
  double d_log_alpha = 0.0;
  // d k(a, b) / d a = input_weight * (a - b).
  double input_weight = 0.0;
};

RadialTerms radial_terms(const KernelConfig& cfg, double r2);

double eval_kernel(const KernelConfig& cfg, const Point& a, const Point& b);

Matrix gram_matrix(const KernelConfig& cfg, const Points& a, const Points& b);

// dK/dtheta for each log-hyperparameter, in hyperparameter_names() order.
std::vector<Matrix> kernel_gradients(const KernelConfig& cfg, const Points& a,
                                     const Points& b);

}  // namespace tgp
