#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "tgp/exact_gp.hpp"
#include "tgp/kernels.hpp"
#include "tgp/svgp.hpp"

namespace {

tgp::Points random_points(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  tgp::Points p(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) p.row(i) << u(rng), u(rng);
  return p;
}

tgp::Vector targets(const tgp::Points& x) {
  tgp::Vector y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y(i) = std::sin(x(i, 0)) * std::cos(x(i, 1));
  return y;
}

void BM_GramMatrix(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const tgp::Points x = random_points(n, 1);
  const auto k = tgp::KernelConfig::make(tgp::KernelFamily::kRationalQuadratic, 0.7, 1.0, 0.7);
  for (auto _ : state) benchmark::DoNotOptimize(tgp::gram_matrix(k, x, x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GramMatrix)->RangeMultiplier(2)->Range(128, 1024)->Complexity();

void BM_LmlGradient(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const tgp::Points x = random_points(n, 2);
  const tgp::Vector y = targets(x);
  tgp::ExactHyperparameters hp;
  hp.kernel = tgp::KernelConfig::make(tgp::KernelFamily::kRationalQuadratic, 0.7, 1.0, 0.7);
  hp.mean = tgp::ConstantMean{0.0};
  hp.noise = tgp::HomoscedasticNoise{std::log(0.05), true};
  for (auto _ : state) benchmark::DoNotOptimize(tgp::lml_gradients(x, y, hp));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LmlGradient)->RangeMultiplier(2)->Range(128, 1024)->Complexity();

void BM_ElboStep(benchmark::State& state) {
  const auto m = static_cast<Eigen::Index>(state.range(0));
  const tgp::Points xb = random_points(256, 3);
  const tgp::Vector yb = targets(xb);
  tgp::SvgpState s;
  s.inducing = random_points(m, 4);
  s.kernel = tgp::KernelConfig::make(tgp::KernelFamily::kRationalQuadratic, 0.7, 1.0, 0.7);
  s.mean = tgp::ConstantMean{0.0};
  s.log_noise = std::log(0.05);
  s.q_mean = tgp::Vector::Zero(m);
  s.q_chol = 0.1 * tgp::Matrix::Identity(m, m);
  for (auto _ : state) benchmark::DoNotOptimize(tgp::elbo_minibatch(s, xb, yb, 4000));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ElboStep)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

}  // namespace

BENCHMARK_MAIN();
