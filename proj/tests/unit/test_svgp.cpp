#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tgp/binary_io.hpp"
#include "tgp/error.hpp"
#include "tgp/exact_gp.hpp"
#include "tgp/methods.hpp"
#include "tgp/metrics.hpp"
#include "tgp/svgp.hpp"

namespace tgp {
namespace {

using fixture::random_svgp_state;

// Marginal q(f) by explicit inverses.
oracle::Posterior qf_oracle(const SvgpState& s, const Points& xs) {
  const Matrix kzz = oracle::gram(s.kernel, s.inducing, s.inducing);
  const Matrix p = oracle::explicit_inverse(kzz);
  const Matrix kxz = oracle::gram(s.kernel, xs, s.inducing);
  const Matrix sm = s.q_chol * s.q_chol.transpose();
  oracle::Posterior out;
  out.mean = eval_mean(s.mean, xs) + kxz * p * s.q_mean;
  const Matrix b = p * (kzz - sm) * p;
  out.var.resize(xs.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    out.var(i) = s.kernel.outputscale() - kxz.row(i).dot(b * kxz.row(i).transpose());
  }
  return out;
}

double kl_oracle(const SvgpState& s) {
  const Matrix kzz = oracle::gram(s.kernel, s.inducing, s.inducing);
  const Matrix kinv = oracle::explicit_inverse(kzz);
  const Matrix sm = s.q_chol * s.q_chol.transpose();
  const double m = static_cast<double>(s.q_mean.size());
  return 0.5 * ((kinv * sm).trace() + s.q_mean.dot(kinv * s.q_mean) - m +
                std::log(kzz.fullPivLu().determinant()) - std::log(sm.fullPivLu().determinant()));
}

double elbo_oracle(const SvgpState& s, const Points& x, const Vector& y, std::size_t n_total,
                   const Vector& noise) {
  const auto q = qf_oracle(s, x);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double r = y(i) - q.mean(i);
    sum += -0.5 * std::log(2.0 * M_PI * noise(i)) - (r * r + q.var(i)) / (2.0 * noise(i));
  }
  return static_cast<double>(n_total) / static_cast<double>(x.rows()) * sum - kl_oracle(s);
}

Matrix chol_of(const Matrix& a) { return a.llt().matrixL(); }

TEST(InitInducing, FullSizeIsPermutation) {
  std::mt19937_64 rng(41);
  const Points x = oracle::random_points(rng, 20);
  const Points z = init_inducing(x, 20, 3);
  std::multiset<std::pair<double, double>> a, b;
  for (Eigen::Index i = 0; i < 20; ++i) {
    a.insert({x(i, 0), x(i, 1)});
    b.insert({z(i, 0), z(i, 1)});
  }
  EXPECT_EQ(a, b);
}

TEST(InitInducing, SinglePointIsTrainingPoint) {
  std::mt19937_64 rng(42);
  const Points x = oracle::random_points(rng, 15);
  const Points z = init_inducing(x, 1, 9);
  ASSERT_EQ(z.rows(), 1);
  bool found = false;
  for (Eigen::Index i = 0; i < 15; ++i) found |= (x.row(i) == z.row(0));
  EXPECT_TRUE(found);
}

TEST(InitInducing, DistinctAndDeterministic) {
  std::mt19937_64 rng(43);
  const Points x = oracle::random_points(rng, 50);
  const Points a = init_inducing(x, 10, 5);
  EXPECT_EQ(a, init_inducing(x, 10, 5));
  EXPECT_NE(a, init_inducing(x, 10, 6));
  std::set<std::pair<double, double>> seen;
  for (Eigen::Index i = 0; i < 10; ++i) seen.insert({a(i, 0), a(i, 1)});
  EXPECT_EQ(seen.size(), 10u);
}

TEST(InitInducing, TooManyIsConfigError) {
  std::mt19937_64 rng(44);
  const Points x = oracle::random_points(rng, 5);
  for (std::size_t m : {std::size_t{0}, std::size_t{6}}) {
    try {
      (void)init_inducing(x, m, 0);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kInvalidConfig);
    }
  }
}

TEST(PredictiveQf, MatchesExplicitInverse) {
  std::mt19937_64 rng(45);
  for (const auto& fc : oracle::all_families()) {
    const SvgpState s = random_svgp_state(rng, 6, fc, true);
    const Points xs = oracle::random_points(rng, 9);
    const Prediction p = predictive_qf(s, xs, false);
    const auto o = qf_oracle(s, xs);
    EXPECT_LT((p.mean - o.mean).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((p.latent_var - o.var).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(PredictiveQf, PriorMatchingStateGivesPrior) {
  std::mt19937_64 rng(46);
  SvgpState s = random_svgp_state(rng, 5, {KernelFamily::kRbf, MaternNu::kFiveHalves}, true);
  s.q_mean.setZero();
  s.q_chol = chol_of(gram_matrix(s.kernel, s.inducing, s.inducing));
  const Points xs = oracle::random_points(rng, 8);
  const Prediction p = predictive_qf(s, xs);
  EXPECT_LT((p.mean - eval_mean(s.mean, xs)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((p.latent_var.array() - s.kernel.outputscale()).abs().maxCoeff(), 1e-9);
}

TEST(PredictiveQf, FullInducingSetInterpolates) {
  std::mt19937_64 rng(47);
  const Points x = oracle::random_points(rng, 10);
  const Vector y = oracle::random_vector(rng, 10);
  SvgpState s;
  s.kernel = KernelConfig::make(KernelFamily::kRbf, 0.6, 1.0);
  s.mean = ConstantMean{0.2};
  s.log_noise = std::log(0.1);
  s.inducing = x;
  ExactHyperparameters hp;
  hp.kernel = s.kernel;
  hp.mean = s.mean;
  hp.noise = FixedNoise{Vector::Constant(10, 1e-12)};
  const Prediction exact = ExactGp(x, y, hp).predict(x);
  s.q_mean = exact.mean - eval_mean(s.mean, x);
  s.q_chol = Matrix::Identity(10, 10) * 1e-9;
  const Prediction p = predictive_qf(s, x);
  EXPECT_LT((p.mean - exact.mean).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((p.mean - y).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(PredictiveQf, FarFromSingleInducingPointRevertsToPrior) {
  SvgpState s;
  s.kernel = KernelConfig::make(KernelFamily::kMatern, 0.5, 2.3);
  s.inducing = Points::Zero(1, 2);
  s.q_mean = Vector::Constant(1, 0.7);
  s.q_chol = Matrix::Constant(1, 1, 0.1);
  s.log_noise = 0.0;
  Points far(1, 2);
  far << 500.0, 500.0;
  EXPECT_NEAR(predictive_qf(s, far).latent_var(0), 2.3, 1e-9);
}

TEST(PredictiveQf, ClampIsTinyOnWellConditionedProblems) {
  std::mt19937_64 rng(48);
  for (const auto& fc : oracle::all_families()) {
    const SvgpState s = random_svgp_state(rng, 8, fc, true);
    const Prediction raw = predictive_qf(s, oracle::random_points(rng, 200), false);
    EXPECT_GE(raw.latent_var.minCoeff(), -1e-8);
  }
}

TEST(ExpectedLoglik, UnitDensity) {
  EXPECT_NEAR(expected_loglik(0.3, 0.0, 0.3, 1.0 / (2.0 * M_PI)), 0.0, 1e-15);
}

TEST(ExpectedLoglik, VariancePenalty) {
  const double v = 0.37;
  EXPECT_NEAR(expected_loglik(1.0, v, 1.0, v), -0.5 * std::log(2.0 * M_PI * v) - 0.5, 1e-15);
}

TEST(ExpectedLoglik, MatchesMonteCarlo) {
  std::mt19937_64 rng(49);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double mu = u(rng) - 0.5, var = u(rng), y = u(rng), v = u(rng);
    std::normal_distribution<double> f(mu, std::sqrt(var));
    const int samples = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < samples; ++i) {
      const double fi = f(rng);
      const double l = -0.5 * std::log(2.0 * M_PI * v) - (y - fi) * (y - fi) / (2.0 * v);
      sum += l;
      sum2 += l * l;
    }
    const double mean = sum / samples;
    const double se = std::sqrt((sum2 / samples - mean * mean) / samples);
    EXPECT_LT(std::abs(expected_loglik(mu, var, y, v) - mean), 3.0 * se);
  }
}

TEST(ExpectedLoglik, RejectsNonPositiveNoise) {
  for (double v : {0.0, -1.0}) {
    try {
      (void)expected_loglik(0.0, 1.0, 0.0, v);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
    }
  }
}

TEST(Kl, ZeroWhenPosteriorEqualsPrior) {
  std::mt19937_64 rng(50);
  SvgpState s = random_svgp_state(rng, 6, {KernelFamily::kRationalQuadratic, MaternNu::kFiveHalves}, true);
  s.q_mean.setZero();
  s.q_chol = chol_of(gram_matrix(s.kernel, s.inducing, s.inducing));
  EXPECT_NEAR(kl_term(s), 0.0, 1e-9);
}

TEST(Kl, MeanShiftClosedForm) {
  std::mt19937_64 rng(51);
  SvgpState s = random_svgp_state(rng, 5, {KernelFamily::kRbf, MaternNu::kFiveHalves}, true);
  const Matrix kzz = gram_matrix(s.kernel, s.inducing, s.inducing);
  s.q_chol = chol_of(kzz);
  const Vector delta = s.q_mean;
  EXPECT_NEAR(kl_term(s), 0.5 * delta.dot(oracle::explicit_inverse(kzz) * delta), 1e-8);
}

TEST(Kl, MatchesOracleAndNonNegative) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    const auto fc = oracle::all_families()[trial % 6];
    const SvgpState s = random_svgp_state(rng, 1 + trial % 8, fc, true);
    const double kl = kl_term(s);
    EXPECT_GE(kl, -1e-9);
    EXPECT_NEAR(kl, kl_oracle(s), 1e-8 * std::max(1.0, std::abs(kl)));
  }
}

TEST(Kl, InvariantToInducingOrder) {
  std::mt19937_64 rng(53);
  const SvgpState s = random_svgp_state(rng, 7, {KernelFamily::kMatern, MaternNu::kFiveHalves}, true);
  std::vector<int> perm(7);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> pm(7);
  for (int i = 0; i < 7; ++i) pm.indices()(i) = perm[i];
  SvgpState t = s;
  t.inducing = pm.transpose() * s.inducing;
  t.q_mean = pm.transpose() * s.q_mean;
  const Matrix sm = s.q_chol * s.q_chol.transpose();
  t.q_chol = chol_of(pm.transpose() * sm * pm);
  EXPECT_NEAR(kl_term(s), kl_term(t), 1e-9);
}

TEST(Elbo, FullBatchMatchesOracle) {
  std::mt19937_64 rng(54);
  for (bool homo : {true, false}) {
    const SvgpState s = random_svgp_state(rng, 5, {KernelFamily::kRbf, MaternNu::kFiveHalves}, homo);
    const Points x = oracle::random_points(rng, 12);
    const Vector y = oracle::random_vector(rng, 12);
    const Vector noise = homo ? Vector::Constant(12, std::exp(*s.log_noise))
                              : oracle::random_vector(rng, 12, 0.05, 0.3);
    const ElboResult r = elbo_minibatch(s, x, y, 12, homo ? nullptr : &noise, false);
    EXPECT_NEAR(r.value, elbo_oracle(s, x, y, 12, noise), 1e-8);
    // A batch standing in for twice as many points doubles the data term.
    const ElboResult r2 = elbo_minibatch(s, x, y, 24, homo ? nullptr : &noise, false);
    EXPECT_NEAR(r2.value + kl_term(s), 2.0 * (r.value + kl_term(s)), 1e-8);
  }
}

TEST(Elbo, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(55);
  std::uniform_int_distribution<int> msize(1, 8), bsize(1, 16);
  for (int trial = 0; trial < 20; ++trial) {
    for (const auto& fc : oracle::all_families()) {
      const bool homo = trial % 2 == 0;
      const SvgpState s = random_svgp_state(rng, msize(rng), fc, homo);
      const int b = bsize(rng);
      const Points x = oracle::random_points(rng, b);
      const Vector y = oracle::random_vector(rng, b);
      const Vector noise = oracle::random_vector(rng, b, 0.05, 0.3);
      const Vector* np = homo ? nullptr : &noise;
      const std::size_t n_total = static_cast<std::size_t>(b) * 3;
      const ElboResult r = elbo_minibatch(s, x, y, n_total, np, true);
      const ScalarFunction f = [&](const Vector& th) {
        SvgpState t = s;
        t.unpack(th);
        return elbo_minibatch(t, x, y, n_total, np, false).value;
      };
      ASSERT_EQ(r.gradient.size(), s.pack().size());
      EXPECT_LT(check_gradient(f, s.pack(), r.gradient), 1e-4)
          << to_string(fc.family) << " trial " << trial;
    }
  }
}

TEST(Elbo, BoundedByExactLml) {
  std::mt19937_64 rng(56);
  for (int trial = 0; trial < 20; ++trial) {
    const auto fc = oracle::all_families()[trial % 6];
    const Eigen::Index n = 12;
    const SvgpState s = random_svgp_state(rng, 1 + trial % 8, fc, true);
    const Points x = oracle::random_points(rng, n);
    const Vector y = oracle::random_vector(rng, n);
    ExactHyperparameters hp;
    hp.kernel = s.kernel;
    hp.mean = s.mean;
    hp.noise = HomoscedasticNoise{*s.log_noise, true};
    EXPECT_LE(elbo_minibatch(s, x, y, n, nullptr, false).value,
              log_marginal_likelihood(x, y, hp) + 1e-6);
  }
}

TEST(Elbo, MonotoneUnderSmallSteps) {
  std::mt19937_64 rng(57);
  SvgpState s = random_svgp_state(rng, 6, {KernelFamily::kRbf, MaternNu::kFiveHalves}, true);
  const Points x = oracle::random_points(rng, 30);
  Vector y(30);
  for (Eigen::Index i = 0; i < 30; ++i) y(i) = std::sin(2.0 * x(i, 0)) + 0.5 * x(i, 1);
  Vector theta = s.pack();
  Adam adam(AdamConfig{.learning_rate = 1e-3}, theta.size());
  double prev = elbo_minibatch(s, x, y, 30, nullptr, false).value;
  int up = 0;
  for (int step = 0; step < 200; ++step) {
    s.unpack(theta);
    const ElboResult r = elbo_minibatch(s, x, y, 30, nullptr, true);
    Vector neg = -r.gradient;
    adam.step(theta, neg);
    s.unpack(theta);
    const double now = elbo_minibatch(s, x, y, 30, nullptr, false).value;
    if (now >= prev) ++up;
    prev = now;
  }
  EXPECT_GE(up, 190);
}

TEST(SvgpState, PackRoundtripAndSerialization) {
  std::mt19937_64 rng(58);
  const SvgpState s = random_svgp_state(rng, 4, {KernelFamily::kRationalQuadratic, MaternNu::kFiveHalves}, true);
  SvgpState t = s;
  t.unpack(s.pack());
  EXPECT_LT((t.q_chol - s.q_chol).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(s.names().size(), static_cast<std::size_t>(s.pack().size()));
  BinaryWriter w;
  s.write(w);
  BinaryReader r(w.bytes());
  const SvgpState back = SvgpState::read(r);
  BinaryWriter w2;
  back.write(w2);
  EXPECT_EQ(w.bytes(), w2.bytes());
}

TEST(FitSvgp, MethodDefaults) {
  const MethodConfig torroba = MethodConfig::defaults(MethodId::kTorroba);
  EXPECT_EQ(torroba.kernel, KernelFamily::kMatern);
  EXPECT_EQ(torroba.nu, MaternNu::kFiveHalves);
  EXPECT_EQ(torroba.adam.learning_rate, 0.1);
  EXPECT_EQ(torroba.adam.max_epochs, 75u);
  EXPECT_EQ(torroba.adam.batch_size, 256u);
  EXPECT_EQ(torroba.num_inducing, 1024u);
  const MethodConfig ours = MethodConfig::defaults(MethodId::kOursVariational);
  EXPECT_EQ(ours.kernel, KernelFamily::kRationalQuadratic);
  EXPECT_EQ(ours.adam.learning_rate, 0.05);
  EXPECT_EQ(ours.adam.max_epochs, 40u);
  EXPECT_EQ(ours.adam.batch_size, 256u);
  EXPECT_EQ(ours.num_inducing, 1024u);
  EXPECT_TRUE(ours.variational());
  EXPECT_TRUE(ours.heteroscedastic());
}

Dataset smooth_draw(std::uint64_t seed, Eigen::Index n) {
  std::mt19937_64 rng(seed);
  const Points raw = oracle::random_points(rng, n, 1.0);
  Dataset data = make_dataset(raw, Vector::Zero(n), std::nullopt);
  Matrix k = oracle::gram(KernelConfig::make(KernelFamily::kRbf, 0.5, 1.0), data.x, data.x);
  k.diagonal().array() += 1e-8;
  const Matrix l = k.llt().matrixL();
  std::normal_distribution<double> z(0.0, 1.0);
  Vector e(n);
  for (Eigen::Index i = 0; i < n; ++i) e(i) = z(rng);
  data.y = l * e;
  for (Eigen::Index i = 0; i < n; ++i) data.y(i) += 0.1 * z(rng);
  return data;
}

TEST(FitSvgp, CompetitiveWithExactGp) {
  const Dataset all = smooth_draw(59, 700);
  std::vector<Eigen::Index> tr(500), te(200);
  std::iota(tr.begin(), tr.end(), 0);
  std::iota(te.begin(), te.end(), 500);
  const Dataset train = all.slice(tr);
  const Dataset test = all.slice(te);

  ExactHyperparameters hp;
  hp.kernel = KernelConfig::make(KernelFamily::kRbf, kInitialHyperparameter, kInitialHyperparameter);
  hp.mean = ConstantMean{0.0};
  hp.noise = HomoscedasticNoise{std::log(kInitialHyperparameter), true};
  const ExactGp exact = fit_exact(train, hp, AdamConfig{.learning_rate = 0.1, .max_epochs = 50});
  const double exact_rmse = rmse(exact.predict(test.x).mean, test.y);

  SvgpFitOptions so;
  so.adam = AdamConfig{.learning_rate = 0.05, .max_epochs = 60, .batch_size = 64};
  so.num_inducing = 64;
  so.kernel = hp.kernel;
  so.mean = ConstantMean{0.0};
  so.init_log_noise = std::log(kInitialHyperparameter);
  const SvgpState s = fit_svgp(train, so, 7);
  const double svgp_rmse = rmse(predictive_qf(s, test.x).mean, test.y);
  EXPECT_LT(svgp_rmse, 2.0 * exact_rmse) << "exact " << exact_rmse << " svgp " << svgp_rmse;
}

TEST(FitSvgp, DeterministicGivenSeed) {
  const Dataset data = smooth_draw(60, 120);
  SvgpFitOptions so;
  so.adam = AdamConfig{.learning_rate = 0.05, .max_epochs = 3, .batch_size = 32};
  so.num_inducing = 16;
  so.kernel = KernelConfig::make(KernelFamily::kRbf, 0.7, 0.7);
  so.init_log_noise = -1.0;
  const SvgpState a = fit_svgp(data, so, 3);
  const SvgpState b = fit_svgp(data, so, 3);
  EXPECT_EQ(a.pack(), b.pack());
  EXPECT_NE(a.pack(), fit_svgp(data, so, 4).pack());
}

TEST(FitSvgp, HeteroscedasticNoiseHasNoLearnedNoise) {
  const Dataset data = smooth_draw(61, 80);
  SvgpFitOptions so;
  so.adam = AdamConfig{.learning_rate = 0.05, .max_epochs = 2, .batch_size = 20};
  so.num_inducing = 10;
  so.kernel = KernelConfig::make(KernelFamily::kRbf, 0.7, 0.7);
  const Vector noise = Vector::Constant(80, 0.05);
  const SvgpState s = fit_svgp(data, so, 1, &noise);
  EXPECT_FALSE(s.log_noise.has_value());
}

}  // namespace
}  // namespace tgp
