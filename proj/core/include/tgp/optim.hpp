#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "tgp/binary_io.hpp"
#include "tgp/types.hpp"

namespace tgp {

struct AdamConfig {
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t max_epochs = 50;
  // 0 means full batch.
  std::size_t batch_size = 0;
};

// Adam with bias correction. step() descends along the supplied gradient, so
// callers maximizing an objective pass the gradient of its negation.
class Adam {
 public:
  Adam() = default;
  Adam(const AdamConfig& cfg, Eigen::Index dim);

  // Throws kTrainingDivergence naming the first non-finite gradient entry
  // (by name when names are supplied).
  void step(Vector& params, const Vector& grad,
            std::span<const std::string> names = {});

  [[nodiscard]] const AdamConfig& config() const { return cfg_; }
  [[nodiscard]] std::uint64_t steps_taken() const { return t_; }
  [[nodiscard]] const Vector& first_moment() const { return m_; }
  [[nodiscard]] const Vector& second_moment() const { return v_; }

  void write(BinaryWriter& out) const;
  static Adam read(BinaryReader& in);

 private:
  AdamConfig cfg_;
  Vector m_;
  Vector v_;
  std::uint64_t t_ = 0;
};

using ScalarFunction = std::function<double(const Vector&)>;

// Central differences (step h per coordinate) compared against an analytic
// gradient. Returns max_i |analytic_i - numeric_i| / max(1, |numeric_i|).
double check_gradient(const ScalarFunction& f, const Vector& x,
                      const Vector& analytic, double h = 1e-5);

Vector numeric_gradient(const ScalarFunction& f, const Vector& x,
                        double h = 1e-5);

}  // namespace tgp
