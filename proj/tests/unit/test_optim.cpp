#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "tgp/binary_io.hpp"
#include "tgp/error.hpp"
#include "tgp/optim.hpp"

namespace tgp {
namespace {

TEST(Adam, ZeroGradientDecaysMoments) {
  Adam adam(AdamConfig{}, 3);
  Vector p = Vector::Zero(3);
  Vector g(3);
  g << 1.0, -2.0, 0.5;
  adam.step(p, g);
  const Vector m1 = adam.first_moment();
  const Vector v1 = adam.second_moment();
  adam.step(p, Vector::Zero(3));
  EXPECT_LT((adam.first_moment() - 0.9 * m1).cwiseAbs().maxCoeff(), 1e-16);
  EXPECT_LT((adam.second_moment() - 0.999 * v1).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(Adam, ZeroGradientOnFreshStateKeepsParamsExactly) {
  Adam adam(AdamConfig{}, 2);
  Vector p(2);
  p << 3.0, 4.0;
  const Vector before = p;
  adam.step(p, Vector::Zero(2));
  EXPECT_EQ(p, before);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  Adam adam(cfg, 1);
  Vector p = Vector::Constant(1, 2.0);
  adam.step(p, Vector::Constant(1, 1.0));
  // m_hat = 1, v_hat = 1, so the step is lr / (1 + eps).
  EXPECT_NEAR(p(0), 2.0 - 0.1 / (1.0 + 1e-8), 1e-15);
  EXPECT_NEAR(p(0), 1.9, 1e-8);
}

TEST(Adam, Deterministic) {
  auto run = [] {
    Adam adam(AdamConfig{}, 4);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    Vector p = Vector::Zero(4);
    std::vector<Vector> traj;
    for (int t = 0; t < 50; ++t) {
      Vector g(4);
      for (int i = 0; i < 4; ++i) g(i) = n(rng) + p(i);
      adam.step(p, g);
      traj.push_back(p);
    }
    return traj;
  };
  EXPECT_EQ(run(), run());
}

TEST(Adam, NonFiniteGradientNamesParameter) {
  Adam adam(AdamConfig{}, 2);
  Vector p = Vector::Zero(2);
  Vector g(2);
  g << 0.0, NAN;
  const std::vector<std::string> names = {"log_lengthscale", "log_noise"};
  try {
    adam.step(p, g, names);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTrainingDivergence);
    EXPECT_NE(std::string(e.what()).find("log_noise"), std::string::npos);
  }
}

TEST(Adam, TinyLearningRateKeepsParams) {
  AdamConfig cfg;
  cfg.learning_rate = 1e-15;
  Adam adam(cfg, 3);
  Vector p(3);
  p << 0.1, 0.2, 0.3;
  const Vector before = p;
  for (int t = 0; t < 100; ++t) adam.step(p, Vector::Constant(3, 5.0));
  EXPECT_LT((p - before).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Adam, DescendsQuadratic) {
  Adam adam(AdamConfig{}, 2);
  Vector p(2);
  p << 3.0, -2.0;
  for (int t = 0; t < 500; ++t) adam.step(p, 2.0 * p);
  EXPECT_LT(p.norm(), 1e-2);
}

TEST(Adam, StateRoundtrip) {
  Adam adam(AdamConfig{.learning_rate = 0.03, .max_epochs = 7, .batch_size = 16}, 3);
  Vector p = Vector::Zero(3);
  Vector g(3);
  g << 0.3, -1.0, 2.0;
  adam.step(p, g);
  adam.step(p, g * 0.5);
  BinaryWriter w;
  adam.write(w);
  BinaryReader r(w.bytes());
  const Adam back = Adam::read(r);
  EXPECT_EQ(back.steps_taken(), adam.steps_taken());
  EXPECT_EQ(back.first_moment(), adam.first_moment());
  EXPECT_EQ(back.second_moment(), adam.second_moment());
  EXPECT_EQ(back.config().learning_rate, 0.03);
  EXPECT_EQ(back.config().max_epochs, 7u);
  EXPECT_EQ(back.config().batch_size, 16u);
  BinaryWriter w2;
  back.write(w2);
  EXPECT_EQ(w.bytes(), w2.bytes());

  // Continuing from the restored state matches continuing the original.
  Adam a2 = back;
  Vector p1 = p, p2 = p;
  adam.step(p1, g);
  a2.step(p2, g);
  EXPECT_EQ(p1, p2);
}

TEST(GradientCheck, Square) {
  const ScalarFunction f = [](const Vector& x) { return x(0) * x(0); };
  EXPECT_LT(check_gradient(f, Vector::Constant(1, 3.0), Vector::Constant(1, 6.0)), 1e-8);
}

TEST(GradientCheck, Constant) {
  const ScalarFunction f = [](const Vector&) { return 4.2; };
  EXPECT_EQ(check_gradient(f, Vector::Constant(2, 1.0), Vector::Zero(2)), 0.0);
}

TEST(GradientCheck, ExpAtZero) {
  const ScalarFunction f = [](const Vector& x) { return std::exp(x(0)); };
  EXPECT_LT(check_gradient(f, Vector::Zero(1), Vector::Constant(1, 1.0)), 1e-8);
}

TEST(GradientCheck, DetectsWrongGradient) {
  const ScalarFunction f = [](const Vector& x) { return x(0) * x(0); };
  EXPECT_NEAR(check_gradient(f, Vector::Constant(1, 3.0), Vector::Constant(1, 7.0)), 1.0 / 6.0,
              1e-8);
}

}  // namespace
}  // namespace tgp
