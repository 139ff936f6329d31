#include "tgp/exact_gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tgp/error.hpp"

namespace tgp {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)
constexpr Eigen::Index kPredictBlock = 2048;

void check_problem(const Points& x, const Vector& y, const ExactHyperparameters& hp) {
  if (x.rows() == 0) fail(ErrorKind::kEmptyDataset, "exact GP needs at least one point");
  if (x.rows() != y.size()) {
    fail(ErrorKind::kInvalidInput, "exact GP: input/target length mismatch");
  }
  if (const auto* fixed = std::get_if<FixedNoise>(&hp.noise)) {
    if (fixed->variances.size() != y.size()) {
      fail(ErrorKind::kInvalidInput, "exact GP: noise vector length mismatch");
    }
    for (Eigen::Index i = 0; i < fixed->variances.size(); ++i) {
      if (!(fixed->variances(i) > 0.0) || !std::isfinite(fixed->variances(i))) {
        fail(ErrorKind::kInvalidInput,
             "noise variance at index " + std::to_string(i) + " is not positive");
      }
    }
  }
}

Matrix noisy_gram(const Points& x, const ExactHyperparameters& hp) {
  Matrix k = gram_matrix(hp.kernel, x, x);
  k.diagonal() += hp.noise_variances(x.rows());
  return k;
}

}  // namespace

Vector ExactHyperparameters::pack() const {
  const Vector kh = kernel.hyperparameters();
  std::vector<double> out(kh.data(), kh.data() + kh.size());
  if (const auto* c = std::get_if<ConstantMean>(&mean)) out.push_back(c->value);
  if (const auto* h = std::get_if<HomoscedasticNoise>(&noise); h && h->learnable) {
    out.push_back(h->log_variance);
  }
  return Eigen::Map<const Vector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

void ExactHyperparameters::unpack(const Vector& theta) {
  const auto nk = static_cast<Eigen::Index>(kernel.num_hyperparameters());
  if (theta.size() != pack().size()) {
    fail(ErrorKind::kInvalidInput, "exact GP: hyperparameter vector size mismatch");
  }
  kernel.set_hyperparameters(theta.head(nk));
  Eigen::Index k = nk;
  if (auto* c = std::get_if<ConstantMean>(&mean)) c->value = theta(k++);
  if (auto* h = std::get_if<HomoscedasticNoise>(&noise); h && h->learnable) {
    h->log_variance = theta(k++);
  }
}

std::vector<std::string> ExactHyperparameters::names() const {
  std::vector<std::string> out = kernel.hyperparameter_names();
  if (std::holds_alternative<ConstantMean>(mean)) out.emplace_back("mean_constant");
  if (const auto* h = std::get_if<HomoscedasticNoise>(&noise); h && h->learnable) {
    out.emplace_back("log_noise");
  }
  return out;
}

Vector ExactHyperparameters::noise_variances(Eigen::Index n) const {
  if (const auto* h = std::get_if<HomoscedasticNoise>(&noise)) {
    return Vector::Constant(n, std::exp(h->log_variance));
  }
  return std::get<FixedNoise>(noise).variances;
}

double log_marginal_likelihood(const Points& x, const Vector& y,
                               const ExactHyperparameters& hp) {
  check_problem(x, y, hp);
  const JitteredCholesky chol = jittered_cholesky(noisy_gram(x, hp), "exact GP");
  const Vector resid = y - eval_mean(hp.mean, x);
  const Vector a = chol.llt.solve(resid);
  const double n = static_cast<double>(y.size());
  return -0.5 * resid.dot(a) - 0.5 * chol.log_determinant() - 0.5 * n * kLog2Pi;
}

LmlResult lml_gradients(const Points& x, const Vector& y,
                        const ExactHyperparameters& hp) {
  check_problem(x, y, hp);
  const Eigen::Index n = x.rows();
  const Matrix kf = gram_matrix(hp.kernel, x, x);
  Matrix ky = kf;
  const Vector noise = hp.noise_variances(n);
  ky.diagonal() += noise;
  const JitteredCholesky chol = jittered_cholesky(ky, "exact GP");
  const Vector resid = y - eval_mean(hp.mean, x);
  const Vector a = chol.llt.solve(resid);

  LmlResult out;
  out.value = -0.5 * resid.dot(a) - 0.5 * chol.log_determinant() -
              0.5 * static_cast<double>(n) * kLog2Pi;

  // dLML/dtheta = 0.5 * sum_ij W_ij dK_ij with W = a a^T - K^{-1}.
  Matrix w = chol.inverse();
  w = a * a.transpose() - w;

  const bool rq = hp.kernel.family == KernelFamily::kRationalQuadratic;
  double g_len = 0.0;
  double g_alpha = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double dx = x(i, 0) - x(j, 0);
      const double dy = x(i, 1) - x(j, 1);
      const RadialTerms t = radial_terms(hp.kernel, dx * dx + dy * dy);
      // Off-diagonal entries appear twice in the symmetric sum.
      g_len += w(i, j) * t.d_log_lengthscale;
      if (rq) g_alpha += w(i, j) * t.d_log_alpha;
    }
  }
  // Diagonal terms: d/dlog l and d/dlog alpha vanish at r = 0.
  const double g_scale = 0.5 * (w.cwiseProduct(kf)).sum();

  out.gradient.resize(static_cast<Eigen::Index>(hp.names().size()));
  Eigen::Index k = 0;
  out.gradient(k++) = g_len;
  out.gradient(k++) = g_scale;
  if (rq) out.gradient(k++) = g_alpha;
  if (std::holds_alternative<ConstantMean>(hp.mean)) out.gradient(k++) = a.sum();
  if (const auto* h = std::get_if<HomoscedasticNoise>(&hp.noise); h && h->learnable) {
    out.gradient(k++) = 0.5 * std::exp(h->log_variance) * w.trace();
  }
  return out;
}

ExactGp::ExactGp(Points x, Vector y, ExactHyperparameters hp)
    : x_(std::move(x)), y_(std::move(y)), hp_(std::move(hp)) {
  check_problem(x_, y_, hp_);
  chol_ = jittered_cholesky(noisy_gram(x_, hp_), "exact GP");
  alpha_ = chol_.llt.solve(y_ - eval_mean(hp_.mean, x_));
}

Vector ExactGp::noise_variances() const { return hp_.noise_variances(x_.rows()); }

double ExactGp::log_marginal_likelihood() const {
  const Vector resid = y_ - eval_mean(hp_.mean, x_);
  return -0.5 * resid.dot(alpha_) - 0.5 * chol_.log_determinant() -
         0.5 * static_cast<double>(y_.size()) * kLog2Pi;
}

Prediction ExactGp::predict(const Points& xstar) const {
  Prediction out;
  const Eigen::Index q = xstar.rows();
  out.mean = eval_mean(hp_.mean, xstar);
  out.latent_var.resize(q);
  const double prior_var = hp_.kernel.outputscale();
  for (Eigen::Index start = 0; start < q; start += kPredictBlock) {
    const Eigen::Index len = std::min(kPredictBlock, q - start);
    const Points block = xstar.middleRows(start, len);
    Matrix kxs = gram_matrix(hp_.kernel, x_, block);
    out.mean.segment(start, len) += kxs.transpose() * alpha_;
    chol_.llt.matrixL().solveInPlace(kxs);
    for (Eigen::Index i = 0; i < len; ++i) {
      out.latent_var(start + i) =
          std::max(0.0, prior_var - kxs.col(i).squaredNorm());
    }
  }
  return out;
}

void write_kernel(BinaryWriter& out, const KernelConfig& k) {
  out.u8(static_cast<std::uint8_t>(k.family));
  out.u8(static_cast<std::uint8_t>(k.nu));
  out.f64(k.log_lengthscale);
  out.f64(k.log_outputscale);
  out.f64(k.log_alpha);
}

KernelConfig read_kernel(BinaryReader& in) {
  KernelConfig k;
  const std::uint8_t family = in.u8();
  const std::uint8_t nu = in.u8();
  if (family > 3 || nu > 2) fail(ErrorKind::kParse, "invalid kernel tag");
  k.family = static_cast<KernelFamily>(family);
  k.nu = static_cast<MaternNu>(nu);
  k.log_lengthscale = in.f64();
  k.log_outputscale = in.f64();
  k.log_alpha = in.f64();
  return k;
}

void write_noise(BinaryWriter& out, const NoiseSpec& noise) {
  if (const auto* h = std::get_if<HomoscedasticNoise>(&noise)) {
    out.u8(0);
    out.f64(h->log_variance);
    out.u8(h->learnable ? 1 : 0);
  } else {
    out.u8(1);
    out.vec(std::get<FixedNoise>(noise).variances);
  }
}

NoiseSpec read_noise(BinaryReader& in) {
  const std::uint8_t tag = in.u8();
  if (tag == 0) {
    HomoscedasticNoise h;
    h.log_variance = in.f64();
    h.learnable = in.u8() != 0;
    return h;
  }
  if (tag == 1) return FixedNoise{in.vec()};
  fail(ErrorKind::kParse, "invalid noise tag");
}

void ExactGp::write(BinaryWriter& out) const {
  write_kernel(out, hp_.kernel);
  write_mean(out, hp_.mean);
  write_noise(out, hp_.noise);
  out.points(x_);
  out.vec(y_);
}

ExactGp ExactGp::read(BinaryReader& in) {
  ExactHyperparameters hp;
  hp.kernel = read_kernel(in);
  hp.mean = read_mean(in);
  hp.noise = read_noise(in);
  Points x = in.points();
  Vector y = in.vec();
  return ExactGp(std::move(x), std::move(y), std::move(hp));
}

ExactGp fit_exact(const Dataset& data, const ExactHyperparameters& init,
                  const AdamConfig& adam, const EpochCallback& on_epoch) {
  ExactHyperparameters hp = init;
  Vector theta = hp.pack();
  const std::vector<std::string> names = hp.names();
  Adam opt(adam, theta.size());
  const double n = static_cast<double>(data.size());
  const double log_floor = std::log(kNoiseFloor);
  for (std::size_t epoch = 1; epoch <= adam.max_epochs; ++epoch) {
    const LmlResult r = lml_gradients(data.x, data.y, hp);
    const double loss = -r.value / n;
    if (!std::isfinite(loss)) {
      fail(ErrorKind::kTrainingDivergence,
           "exact GP loss became non-finite at epoch " + std::to_string(epoch));
    }
    if (on_epoch) on_epoch(epoch, loss);
    if (theta.size() == 0) continue;
    opt.step(theta, -r.gradient / n, names);
    hp.unpack(theta);
    if (auto* h = std::get_if<HomoscedasticNoise>(&hp.noise); h && h->learnable) {
      if (h->log_variance < log_floor) {
        h->log_variance = log_floor;
        theta = hp.pack();
      }
    }
  }
  return ExactGp(data.x, data.y, std::move(hp));
}

}  // namespace tgp
