#pragma once

// Random model states shared by the unit tests and the acceptance run.

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tgp/exact_gp.hpp"
#include "tgp/svgp.hpp"

namespace tgp::fixture {

inline ExactHyperparameters random_exact_hp(std::mt19937_64& rng, const oracle::FamilyCase& fc,
                                            Eigen::Index n, bool heteroscedastic) {
  ExactHyperparameters hp;
  hp.kernel = oracle::random_kernel(rng, fc.family, fc.nu);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  hp.mean = ConstantMean{u(rng)};
  if (heteroscedastic) {
    hp.noise = FixedNoise{oracle::random_vector(rng, n, 0.01, 0.3)};
  } else {
    hp.noise = HomoscedasticNoise{std::log(0.05 + 0.2 * (u(rng) + 0.5)), true};
  }
  return hp;
}

// q(u) drawn relative to the prior: q_mean = Lk z and q_chol = Lk A with
// Lk = chol(Kzz) and A lower triangular with diagonal near 0.5, so that
// Kzz^{-1} S and the KL stay of order one.
inline SvgpState random_svgp_state(std::mt19937_64& rng, Eigen::Index m,
                                   const oracle::FamilyCase& fc, bool homoscedastic) {
  SvgpState s;
  s.inducing = oracle::random_points(rng, m);
  s.kernel = oracle::random_kernel(rng, fc.family, fc.nu);
  Matrix kzz = oracle::gram(s.kernel, s.inducing, s.inducing);
  kzz.diagonal().array() += 1e-6;
  const Matrix lk = kzz.llt().matrixL();
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  Matrix a = Matrix::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    a(j, j) = 0.5 * std::exp(u(rng));
    for (Eigen::Index i = j + 1; i < m; ++i) a(i, j) = 0.5 * u(rng);
  }
  s.q_chol = lk * a;
  s.q_mean = lk * oracle::random_vector(rng, m, -1.0, 1.0);
  s.mean = ConstantMean{u(rng)};
  if (homoscedastic) s.log_noise = std::log(0.05 + std::abs(u(rng)));
  return s;
}

}  // namespace tgp::fixture
