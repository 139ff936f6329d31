#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tgp/error.hpp"
#include "tgp/kernels.hpp"
#include "tgp/linalg.hpp"
#include "tgp/optim.hpp"

namespace tgp {
namespace {

Point pt(double x, double y) { return Point(x, y); }

TEST(Kernels, RbfAtZeroDistanceIsOutputscale) {
  const KernelConfig k = KernelConfig::make(KernelFamily::kRbf, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(eval_kernel(k, pt(0, 0), pt(0, 0)), 1.0);
}

TEST(Kernels, RbfUnitDiagonalOffset) {
  const KernelConfig k = KernelConfig::make(KernelFamily::kRbf, 1.0, 1.0);
  EXPECT_NEAR(eval_kernel(k, pt(0, 0), pt(1, 1)), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(eval_kernel(k, pt(0, 0), pt(1, 1)), 0.3678794, 1e-7);
}

TEST(Kernels, RationalQuadraticHalf) {
  const KernelConfig k = KernelConfig::make(KernelFamily::kRationalQuadratic, 1.0, 1.0, 1.0);
  EXPECT_NEAR(eval_kernel(k, pt(0, 0), pt(1, 1)), 0.5, 1e-15);
}

TEST(Kernels, MaternThreeHalvesAtUnitDistance) {
  const KernelConfig k =
      KernelConfig::make(KernelFamily::kMatern, 1.0, 1.0, 1.0, MaternNu::kThreeHalves);
  const double expected = (1.0 + std::sqrt(3.0)) * std::exp(-std::sqrt(3.0));
  EXPECT_NEAR(eval_kernel(k, pt(0, 0), pt(1, 0)), expected, 1e-14);
  EXPECT_NEAR(eval_kernel(k, pt(0, 0), pt(1, 0)), 0.4834, 1e-4);
}

TEST(Kernels, NonFiniteInputRejected) {
  const KernelConfig k = KernelConfig::make(KernelFamily::kRbf, 1.0, 1.0);
  try {
    (void)eval_kernel(k, pt(NAN, 0), pt(0, 0));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }
  Points a(1, 2);
  a << 0.0, INFINITY;
  EXPECT_THROW((void)gram_matrix(k, a, a), Error);
}

TEST(Kernels, MatchesClosedFormOracle) {
  std::mt19937_64 rng(11);
  for (const auto& fc : oracle::all_families()) {
    const KernelConfig k = oracle::random_kernel(rng, fc.family, fc.nu);
    const Points a = oracle::random_points(rng, 7);
    const Points b = oracle::random_points(rng, 5);
    const Matrix got = gram_matrix(k, a, b);
    const Matrix want = oracle::gram(k, a, b);
    EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-13) << to_string(fc.family);
  }
}

TEST(Kernels, SymmetryAndDiagonal) {
  std::mt19937_64 rng(12);
  for (const auto& fc : oracle::all_families()) {
    const KernelConfig k = oracle::random_kernel(rng, fc.family, fc.nu);
    const Points a = oracle::random_points(rng, 1000, 3.0);
    const Points b = oracle::random_points(rng, 1000, 3.0);
    for (Eigen::Index i = 0; i < 1000; ++i) {
      const double kab = eval_kernel(k, a.row(i), b.row(i));
      ASSERT_EQ(kab, eval_kernel(k, b.row(i), a.row(i)));
      ASSERT_NEAR(eval_kernel(k, a.row(i), a.row(i)), k.outputscale(), 1e-12);
    }
  }
}

TEST(Kernels, GramSinglePoint) {
  const KernelConfig k = KernelConfig::make(KernelFamily::kRbf, 0.7, 2.5);
  Points a(1, 2);
  a << 0.3, -0.2;
  const Matrix g = gram_matrix(k, a, a);
  ASSERT_EQ(g.rows(), 1);
  ASSERT_EQ(g.cols(), 1);
  EXPECT_NEAR(g(0, 0), 2.5, 1e-14);
}

TEST(Kernels, GramSymmetricWithUnitDiagonal) {
  const KernelConfig k = KernelConfig::make(KernelFamily::kRbf, 1.0, 1.0);
  Points a(3, 2);
  a << 0, 0, 1, 0, 0, 2;
  const Matrix g = gram_matrix(k, a, a);
  EXPECT_EQ(g, g.transpose());
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(g(i, i), 1.0, 1e-15);
}

TEST(Kernels, GramSwapIsTranspose) {
  std::mt19937_64 rng(13);
  for (const auto& fc : oracle::all_families()) {
    const KernelConfig k = oracle::random_kernel(rng, fc.family, fc.nu);
    const Points a = oracle::random_points(rng, 6);
    const Points b = oracle::random_points(rng, 4);
    EXPECT_EQ(gram_matrix(k, a, b), gram_matrix(k, b, a).transpose());
  }
}

TEST(Kernels, GramEmptyIsEmpty) {
  const KernelConfig k = KernelConfig::make(KernelFamily::kRbf, 1.0, 1.0);
  const Points none(0, 2);
  Points one(1, 2);
  one << 0, 0;
  EXPECT_EQ(gram_matrix(k, none, one).size(), 0);
  EXPECT_EQ(gram_matrix(k, none, none).size(), 0);
}

TEST(Kernels, PositiveSemidefiniteWithSmallJitter) {
  std::mt19937_64 rng(14);
  std::uniform_int_distribution<int> size(1, 20);
  for (const auto& fc : oracle::all_families()) {
    for (int trial = 0; trial < 50; ++trial) {
      const KernelConfig k = oracle::random_kernel(rng, fc.family, fc.nu);
      const Points a = oracle::random_points(rng, size(rng));
      Matrix g = gram_matrix(k, a, a);
      g.diagonal().array() += 1e-8;
      Eigen::LLT<Matrix> llt(g);
      ASSERT_EQ(llt.info(), Eigen::Success) << to_string(fc.family) << " trial " << trial;
    }
  }
}

TEST(Kernels, OutputscaleGradientEqualsKernel) {
  std::mt19937_64 rng(15);
  for (const auto& fc : oracle::all_families()) {
    const KernelConfig k = oracle::random_kernel(rng, fc.family, fc.nu);
    const Points a = oracle::random_points(rng, 5);
    const auto grads = kernel_gradients(k, a, a);
    ASSERT_EQ(grads.size(), k.num_hyperparameters());
    EXPECT_LT((grads[1] - gram_matrix(k, a, a)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Kernels, RbfLengthscaleGradientZeroOnDiagonal) {
  const KernelConfig k = KernelConfig::make(KernelFamily::kRbf, 0.8, 1.3);
  std::mt19937_64 rng(16);
  const Points a = oracle::random_points(rng, 4);
  const auto grads = kernel_gradients(k, a, a);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(grads[0](i, i), 0.0);
}

TEST(Kernels, RbfLengthscaleGradientValue) {
  const KernelConfig k = KernelConfig::make(KernelFamily::kRbf, 1.0, 1.0);
  Points a(1, 2), b(1, 2);
  a << 0, 0;
  b << 1, 1;
  const auto grads = kernel_gradients(k, a, b);
  EXPECT_NEAR(grads[0](0, 0), 2.0 * std::exp(-1.0), 1e-14);
  EXPECT_NEAR(grads[0](0, 0), 0.7357588, 1e-7);
  const ScalarFunction f = [&](const Vector& th) {
    KernelConfig kk = k;
    kk.set_hyperparameters(th);
    return eval_kernel(kk, a.row(0), b.row(0));
  };
  EXPECT_NEAR(numeric_gradient(f, k.hyperparameters())(0), 0.7357588, 1e-7);
}

TEST(Kernels, HyperparameterGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(17);
  for (const auto& fc : oracle::all_families()) {
    for (int trial = 0; trial < 5; ++trial) {
      const KernelConfig k = oracle::random_kernel(rng, fc.family, fc.nu);
      const Points a = oracle::random_points(rng, 4);
      const Points b = oracle::random_points(rng, 3);
      const auto grads = kernel_gradients(k, a, b);
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
          const ScalarFunction f = [&](const Vector& th) {
            KernelConfig kk = k;
            kk.set_hyperparameters(th);
            return eval_kernel(kk, a.row(i), b.row(j));
          };
          Vector analytic(grads.size());
          for (std::size_t p = 0; p < grads.size(); ++p) analytic(p) = grads[p](i, j);
          EXPECT_LT(check_gradient(f, k.hyperparameters(), analytic), 1e-5)
              << to_string(fc.family);
        }
      }
    }
  }
}

TEST(Kernels, InputWeightGivesLocationGradient) {
  std::mt19937_64 rng(18);
  for (const auto& fc : oracle::all_families()) {
    const KernelConfig k = oracle::random_kernel(rng, fc.family, fc.nu);
    const Points p = oracle::random_points(rng, 2);
    const Point b = p.row(1);
    const Vector a0 = p.row(0).transpose();
    const ScalarFunction f = [&](const Vector& a) {
      return eval_kernel(k, Point(a(0), a(1)), b);
    };
    const RadialTerms t = radial_terms(k, (p.row(0) - b).squaredNorm());
    const Vector analytic = t.input_weight * (a0 - b.transpose());
    EXPECT_LT(check_gradient(f, a0, analytic), 1e-6) << to_string(fc.family);
  }
}

TEST(Kernels, MaternHalfEqualsAbsoluteExponential) {
  std::mt19937_64 rng(19);
  const Points a = oracle::random_points(rng, 30, 3.0);
  const Points b = oracle::random_points(rng, 30, 3.0);
  for (double l : {0.3, 1.0, 2.7}) {
    const KernelConfig m = KernelConfig::make(KernelFamily::kMatern, l, 1.7, 1.0, MaternNu::kHalf);
    const KernelConfig e = KernelConfig::make(KernelFamily::kAbsoluteExponential, l, 1.7);
    EXPECT_LT((gram_matrix(m, a, b) - gram_matrix(e, a, b)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Kernels, HyperparameterCountAndNames) {
  EXPECT_EQ(KernelConfig::make(KernelFamily::kRbf, 1, 1).num_hyperparameters(), 2u);
  EXPECT_EQ(KernelConfig::make(KernelFamily::kRationalQuadratic, 1, 1).num_hyperparameters(), 3u);
  EXPECT_EQ(KernelConfig::make(KernelFamily::kMatern, 1, 1).num_hyperparameters(), 2u);
  const auto names = KernelConfig::make(KernelFamily::kRationalQuadratic, 1, 1).hyperparameter_names();
  ASSERT_EQ(names.size(), 3u);
  EXPECT_EQ(names[0], "log_lengthscale");
  EXPECT_EQ(names[1], "log_outputscale");
  EXPECT_EQ(names[2], "log_alpha");
}

TEST(Kernels, FamilyNamesRoundtrip) {
  for (auto f : {KernelFamily::kRbf, KernelFamily::kRationalQuadratic,
                 KernelFamily::kAbsoluteExponential, KernelFamily::kMatern}) {
    EXPECT_EQ(parse_kernel_family(to_string(f)), f);
  }
  EXPECT_THROW(parse_kernel_family("cosine"), Error);
}

TEST(Linalg, JitterEscalatesOnSingularMatrix) {
  Matrix a = Matrix::Ones(3, 3);
  const JitteredCholesky c = jittered_cholesky(a, "test");
  EXPECT_GT(c.jitter, 0.0);
  EXPECT_LE(c.jitter, kMaxJitter);
  const Matrix spd = Matrix::Identity(3, 3) * 2.0;
  EXPECT_EQ(jittered_cholesky(spd, "test").jitter, 0.0);
}

TEST(Linalg, IndefiniteMatrixIsIllConditioned) {
  Matrix a = Matrix::Identity(2, 2);
  a(1, 1) = -1.0;
  try {
    (void)jittered_cholesky(a, "test");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIllConditioned);
  }
}

}  // namespace
}  // namespace tgp
