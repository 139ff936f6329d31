#pragma once

#include <string_view>

#include <Eigen/Cholesky>

#include "tgp/types.hpp"

namespace tgp {

// Cholesky factor of A + jitter * I. Jitter starts at 0, then 1e-8, growing
// by 10x up to 1e-3; past that the matrix is reported as ill-conditioned.
struct JitteredCholesky {
  Eigen::LLT<Matrix> llt;
  double jitter = 0.0;

  [[nodiscard]] double log_determinant() const;
  [[nodiscard]] Matrix inverse() const;
};

inline constexpr double kFirstJitter = 1e-8;
inline constexpr double kMaxJitter = 1e-3;

JitteredCholesky jittered_cholesky(const Matrix& a, std::string_view what);

}  // namespace tgp
