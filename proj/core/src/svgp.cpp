#include "tgp/svgp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tgp/error.hpp"
#include "tgp/linalg.hpp"
#include "tgp/random.hpp"

namespace tgp {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr Eigen::Index kPredictBlock = 2048;

// Kernel values between two point sets plus the derivative pieces needed by
// the ELBO gradient.
struct CrossTerms {
  Matrix k;
  Matrix d_len;
  Matrix d_alpha;
  Matrix w;  // input weights: dk(a_i, b_j)/da_i = w_ij (a_i - b_j)
};

CrossTerms cross_terms(const KernelConfig& cfg, const Points& a, const Points& b,
                       bool with_derivatives) {
  CrossTerms t;
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.rows();
  const bool rq = cfg.family == KernelFamily::kRationalQuadratic;
  t.k.resize(n, m);
  if (with_derivatives) {
    t.d_len.resize(n, m);
    t.w.resize(n, m);
    if (rq) t.d_alpha.resize(n, m);
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dx = a(i, 0) - b(j, 0);
      const double dy = a(i, 1) - b(j, 1);
      const RadialTerms r = radial_terms(cfg, dx * dx + dy * dy);
      t.k(i, j) = r.value;
      if (with_derivatives) {
        t.d_len(i, j) = r.d_log_lengthscale;
        t.w(i, j) = r.input_weight;
        if (rq) t.d_alpha(i, j) = r.d_log_alpha;
      }
    }
  }
  return t;
}

// Pieces of q(f) shared by prediction, KL and the ELBO.
struct Posterior {
  CrossTerms zz;
  JitteredCholesky chol;
  Matrix p;      // Kzz^{-1}
  Matrix s;      // q_chol q_chol^T
  Matrix ps;     // P S
  Matrix b;      // P S P - P
  Vector w;      // P q_mean
};

Posterior make_posterior(const SvgpState& st, bool with_derivatives) {
  Posterior post;
  post.zz = cross_terms(st.kernel, st.inducing, st.inducing, with_derivatives);
  post.chol = jittered_cholesky(post.zz.k, "inducing covariance Kzz");
  post.p = post.chol.inverse();
  post.s.noalias() = st.q_chol.triangularView<Eigen::Lower>() *
                     st.q_chol.transpose();
  post.ps.noalias() = post.p * post.s;
  post.b.noalias() = post.ps * post.p;
  post.b -= post.p;
  // Symmetrize against roundoff so that downstream quadratic forms agree.
  post.b = 0.5 * (post.b + post.b.transpose()).eval();
  post.w.noalias() = post.p * st.q_mean;
  return post;
}

double kl_from(const SvgpState& st, const Posterior& post) {
  const double m = static_cast<double>(st.num_inducing());
  const double trace = post.ps.trace();
  const double quad = st.q_mean.dot(post.w);
  const double logdet_s =
      2.0 * st.q_chol.diagonal().array().log().sum();
  return 0.5 * (trace + quad - m + post.chol.log_determinant() - logdet_s);
}

std::size_t num_params(const SvgpState& st) {
  const auto m = static_cast<std::size_t>(st.num_inducing());
  std::size_t n = 2 * m + m + m * (m + 1) / 2 + st.kernel.num_hyperparameters();
  if (std::holds_alternative<ConstantMean>(st.mean)) ++n;
  if (st.log_noise) ++n;
  return n;
}

}  // namespace

void SvgpState::validate() const {
  const Eigen::Index m = num_inducing();
  if (m < 1) fail(ErrorKind::kInvalidConfig, "SVGP needs at least one inducing point");
  if (q_mean.size() != m || q_chol.rows() != m || q_chol.cols() != m) {
    fail(ErrorKind::kInvalidInput, "SVGP variational parameter shapes disagree");
  }
  if (!(q_chol.diagonal().array() > 0.0).all()) {
    fail(ErrorKind::kInvalidInput, "SVGP variational Cholesky diagonal must be positive");
  }
}

Vector SvgpState::pack() const {
  const Eigen::Index m = num_inducing();
  Vector theta(static_cast<Eigen::Index>(num_params(*this)));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    theta(k++) = inducing(i, 0);
    theta(k++) = inducing(i, 1);
  }
  theta.segment(k, m) = q_mean;
  k += m;
  for (Eigen::Index j = 0; j < m; ++j) {
    theta(k++) = std::log(q_chol(j, j));
    for (Eigen::Index i = j + 1; i < m; ++i) theta(k++) = q_chol(i, j);
  }
  const Vector kh = kernel.hyperparameters();
  theta.segment(k, kh.size()) = kh;
  k += kh.size();
  if (const auto* c = std::get_if<ConstantMean>(&mean)) theta(k++) = c->value;
  if (log_noise) theta(k++) = *log_noise;
  return theta;
}

void SvgpState::unpack(const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != num_params(*this)) {
    fail(ErrorKind::kInvalidInput, "SVGP parameter vector size mismatch");
  }
  const Eigen::Index m = num_inducing();
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    inducing(i, 0) = theta(k++);
    inducing(i, 1) = theta(k++);
  }
  q_mean = theta.segment(k, m);
  k += m;
  q_chol.setZero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    q_chol(j, j) = std::exp(theta(k++));
    for (Eigen::Index i = j + 1; i < m; ++i) q_chol(i, j) = theta(k++);
  }
  const auto nk = static_cast<Eigen::Index>(kernel.num_hyperparameters());
  kernel.set_hyperparameters(theta.segment(k, nk));
  k += nk;
  if (auto* c = std::get_if<ConstantMean>(&mean)) c->value = theta(k++);
  if (log_noise) log_noise = theta(k++);
}

std::vector<std::string> SvgpState::names() const {
  const Eigen::Index m = num_inducing();
  std::vector<std::string> out;
  out.reserve(num_params(*this));
  for (Eigen::Index i = 0; i < m; ++i) {
    out.push_back("inducing[" + std::to_string(i) + "].x");
    out.push_back("inducing[" + std::to_string(i) + "].y");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    out.push_back("q_mean[" + std::to_string(i) + "]");
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    out.push_back("log_q_chol[" + std::to_string(j) + "," + std::to_string(j) + "]");
    for (Eigen::Index i = j + 1; i < m; ++i) {
      out.push_back("q_chol[" + std::to_string(i) + "," + std::to_string(j) + "]");
    }
  }
  for (auto& n : kernel.hyperparameter_names()) out.push_back(std::move(n));
  if (std::holds_alternative<ConstantMean>(mean)) out.emplace_back("mean_constant");
  if (log_noise) out.emplace_back("log_noise");
  return out;
}

void SvgpState::write(BinaryWriter& out) const {
  write_kernel(out, kernel);
  write_mean(out, mean);
  out.u8(log_noise ? 1 : 0);
  out.f64(log_noise.value_or(0.0));
  out.points(inducing);
  out.vec(q_mean);
  out.mat(q_chol);
}

SvgpState SvgpState::read(BinaryReader& in) {
  SvgpState st;
  st.kernel = read_kernel(in);
  st.mean = read_mean(in);
  const bool has_noise = in.u8() != 0;
  const double log_noise = in.f64();
  if (has_noise) st.log_noise = log_noise;
  st.inducing = in.points();
  st.q_mean = in.vec();
  st.q_chol = in.mat();
  st.validate();
  return st;
}

Points init_inducing(const Points& x, std::size_t m, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (m < 1 || m > n) {
    fail(ErrorKind::kInvalidConfig,
         "inducing count " + std::to_string(m) + " must be in [1, " +
             std::to_string(n) + "]");
  }
  Rng rng = make_rng(seed, streams::kInducingInit);
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  // Partial Fisher-Yates: the first m slots end up a uniform draw without
  // replacement.
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  Points z(static_cast<Eigen::Index>(m), 2);
  for (std::size_t i = 0; i < m; ++i) z.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
  return z;
}

Prediction predictive_qf(const SvgpState& state, const Points& xstar, bool clamp) {
  state.validate();
  const Posterior post = make_posterior(state, false);
  Prediction out;
  const Eigen::Index q = xstar.rows();
  out.mean = eval_mean(state.mean, xstar);
  out.latent_var.resize(q);
  const double prior_var = state.kernel.outputscale();
  for (Eigen::Index start = 0; start < q; start += kPredictBlock) {
    const Eigen::Index len = std::min(kPredictBlock, q - start);
    const Matrix kxz = gram_matrix(state.kernel, xstar.middleRows(start, len),
                                   state.inducing);
    out.mean.segment(start, len) += kxz * post.w;
    const Matrix kb = kxz * post.b;
    for (Eigen::Index i = 0; i < len; ++i) {
      const double v = prior_var + kb.row(i).dot(kxz.row(i));
      out.latent_var(start + i) = clamp ? std::max(0.0, v) : v;
    }
  }
  return out;
}

double expected_loglik(double mean, double var, double y, double noise_var) {
  if (!(noise_var > 0.0)) {
    fail(ErrorKind::kInvalidInput, "expected_loglik: noise variance must be positive");
  }
  if (var < 0.0) {
    fail(ErrorKind::kInvalidInput, "expected_loglik: q(f) variance must be >= 0");
  }
  const double r = y - mean;
  return -0.5 * (kLog2Pi + std::log(noise_var)) - (r * r + var) / (2.0 * noise_var);
}

double kl_term(const SvgpState& state) {
  state.validate();
  return kl_from(state, make_posterior(state, false));
}

ElboResult elbo_minibatch(const SvgpState& st, const Points& xb, const Vector& yb,
                          std::size_t n_total, const Vector* batch_noise,
                          bool with_gradient) {
  st.validate();
  const Eigen::Index b = xb.rows();
  const Eigen::Index m = st.num_inducing();
  if (b == 0) fail(ErrorKind::kInvalidInput, "ELBO batch is empty");
  if (yb.size() != b) fail(ErrorKind::kInvalidInput, "ELBO batch length mismatch");
  if (!batch_noise && !st.log_noise) {
    fail(ErrorKind::kInvalidConfig, "ELBO needs either per-point noise or a likelihood noise");
  }
  if (batch_noise && batch_noise->size() != b) {
    fail(ErrorKind::kInvalidInput, "ELBO batch noise length mismatch");
  }

  const Posterior post = make_posterior(st, with_gradient);
  const CrossTerms xz = cross_terms(st.kernel, xb, st.inducing, with_gradient);
  const double s_out = st.kernel.outputscale();
  const double scale = static_cast<double>(n_total) / static_cast<double>(b);

  const Vector mu = eval_mean(st.mean, xb) + xz.k * post.w;
  const Matrix kb = xz.k * post.b;
  const Vector var = (s_out + (kb.cwiseProduct(xz.k)).rowwise().sum().array()).matrix();
  const Vector noise = batch_noise ? *batch_noise
                                   : Vector::Constant(b, std::exp(*st.log_noise));
  for (Eigen::Index i = 0; i < b; ++i) {
    if (!(noise(i) > 0.0)) {
      fail(ErrorKind::kInvalidInput,
           "noise variance at batch index " + std::to_string(i) + " is not positive");
    }
  }

  const Vector resid = yb - mu;
  double ell = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    ell += -0.5 * (kLog2Pi + std::log(noise(i))) -
           (resid(i) * resid(i) + var(i)) / (2.0 * noise(i));
  }
  const double kl = kl_from(st, post);

  ElboResult out;
  out.value = scale * ell - kl;
  if (!with_gradient) return out;

  // Per-point sensitivities of the scaled expected log-likelihood.
  const Vector g_mu = scale * resid.cwiseQuotient(noise);
  const Vector g_var = (-0.5 * scale) * noise.cwiseInverse();

  // C = Kxz^T diag(g_var) Kxz; p = P Kxz^T g_mu.
  const Matrix c = xz.k.transpose() * g_var.asDiagonal() * xz.k;
  const Vector p = post.p * (xz.k.transpose() * g_mu);

  // dE/dKxz.
  Matrix g_xz = g_mu * post.w.transpose();
  g_xz.noalias() += 2.0 * g_var.asDiagonal() * kb;

  // dE/dKzz: mean term, variance term -P M P with M = S P C + C P S - C
  // (rewritten through Q = P C P), and the KL term.
  Matrix q = post.p * c * post.p;
  q = 0.5 * (q + q.transpose()).eval();
  Matrix pmp = post.ps * q;
  pmp = (pmp + pmp.transpose()).eval() - q;
  Matrix g_zz = -0.5 * (p * post.w.transpose() + post.w * p.transpose());
  g_zz -= pmp;
  Matrix pmsp = post.b + post.p;  // P S P
  g_zz += 0.5 * (pmsp + post.w * post.w.transpose() - post.p);

  out.gradient = Vector::Zero(static_cast<Eigen::Index>(num_params(st)));
  Eigen::Index k = 0;

  // Inducing locations.
  {
    const Matrix gx = g_xz.cwiseProduct(xz.w);           // b x m
    Matrix gz = (g_zz + g_zz.transpose()).cwiseProduct(post.zz.w);
    gz.diagonal().setZero();
    const Vector gx_col = gx.colwise().sum().transpose();
    const Vector gz_row = gz.rowwise().sum();
    const Matrix gx_x = gx.transpose() * xb;             // m x 2
    const Matrix gz_z = gz * st.inducing;                // m x 2
    for (Eigen::Index a = 0; a < m; ++a) {
      for (int d = 0; d < 2; ++d) {
        out.gradient(k++) = (gx_col(a) + gz_row(a)) * st.inducing(a, d) -
                            gx_x(a, d) - gz_z(a, d);
      }
    }
  }

  // Variational mean.
  out.gradient.segment(k, m) = p - post.w;
  k += m;

  // Variational Cholesky factor: dE/dS = P C P - P / 2, dE/dL = 2 (dE/dS) L;
  // the log|S| / 2 term contributes exactly 1 per log-diagonal entry.
  {
    Matrix g_s = q - 0.5 * post.p;
    const Matrix g_l = 2.0 * g_s * st.q_chol.triangularView<Eigen::Lower>();
    for (Eigen::Index j = 0; j < m; ++j) {
      out.gradient(k++) = g_l(j, j) * st.q_chol(j, j) + 1.0;
      for (Eigen::Index i = j + 1; i < m; ++i) out.gradient(k++) = g_l(i, j);
    }
  }

  // Kernel hyperparameters. Kzz derivatives exclude the jitter.
  {
    const double sum_gvar = g_var.sum();
    out.gradient(k++) = g_xz.cwiseProduct(xz.d_len).sum() +
                        g_zz.cwiseProduct(post.zz.d_len).sum();
    out.gradient(k++) = g_xz.cwiseProduct(xz.k).sum() +
                        g_zz.cwiseProduct(post.zz.k).sum() + s_out * sum_gvar;
    if (st.kernel.family == KernelFamily::kRationalQuadratic) {
      out.gradient(k++) = g_xz.cwiseProduct(xz.d_alpha).sum() +
                          g_zz.cwiseProduct(post.zz.d_alpha).sum();
    }
  }

  if (std::holds_alternative<ConstantMean>(st.mean)) out.gradient(k++) = g_mu.sum();

  if (st.log_noise) {
    const double v = std::exp(*st.log_noise);
    double g = 0.0;
    for (Eigen::Index i = 0; i < b; ++i) {
      g += -0.5 + (resid(i) * resid(i) + var(i)) / (2.0 * v);
    }
    out.gradient(k++) = scale * g;
  }
  return out;
}

SvgpState fit_svgp(const Dataset& data, const SvgpFitOptions& options,
                   std::uint64_t seed, const Vector* noise,
                   const EpochCallback& on_epoch) {
  const auto n = static_cast<std::size_t>(data.size());
  if (n == 0) fail(ErrorKind::kEmptyDataset, "SVGP needs training data");
  if (noise && static_cast<std::size_t>(noise->size()) != n) {
    fail(ErrorKind::kInvalidInput, "SVGP noise vector length mismatch");
  }
  SvgpState st;
  st.inducing = init_inducing(data.x, options.num_inducing, seed);
  const Eigen::Index m = st.inducing.rows();
  st.q_mean = Vector::Zero(m);
  st.q_chol = options.init_q_scale * Matrix::Identity(m, m);
  st.kernel = options.kernel;
  st.mean = options.mean;
  if (!noise) st.log_noise = options.init_log_noise;

  Vector theta = st.pack();
  const std::vector<std::string> names = st.names();
  Adam opt(options.adam, theta.size());
  Rng shuffle_rng = make_rng(seed, streams::kBatchShuffle);
  const std::size_t batch = options.adam.batch_size == 0
                                ? n
                                : std::min(options.adam.batch_size, n);
  const double log_floor = std::log(kNoiseFloor);

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (std::size_t epoch = 1; epoch <= options.adam.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      const auto bl = static_cast<Eigen::Index>(len);
      Points xb(bl, 2);
      Vector yb(bl);
      Vector nb;
      if (noise) nb.resize(bl);
      for (Eigen::Index i = 0; i < bl; ++i) {
        const Eigen::Index src = order[start + static_cast<std::size_t>(i)];
        xb.row(i) = data.x.row(src);
        yb(i) = data.y(src);
        if (noise) nb(i) = (*noise)(src);
      }
      const ElboResult r = elbo_minibatch(st, xb, yb, n, noise ? &nb : nullptr);
      const double loss = -r.value / static_cast<double>(n);
      if (!std::isfinite(loss)) {
        fail(ErrorKind::kTrainingDivergence,
             "SVGP loss became non-finite at epoch " + std::to_string(epoch));
      }
      loss_sum += loss;
      ++batches;
      opt.step(theta, -r.gradient / static_cast<double>(n), names);
      st.unpack(theta);
      if (st.log_noise && *st.log_noise < log_floor) {
        st.log_noise = log_floor;
        theta = st.pack();
      }
    }
    if (on_epoch) on_epoch(epoch, loss_sum / static_cast<double>(batches));
  }
  return st;
}

}  // namespace tgp
