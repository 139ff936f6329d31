#include "tgp/kernels.hpp"

#include <cmath>

#include "tgp/error.hpp"

namespace tgp {
namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kSqrt5 = 2.2360679774997896;

void require_finite(const Points& pts, const char* what) {
  if (!pts.allFinite()) {
    fail(ErrorKind::kInvalidInput,
         std::string("non-finite coordinate in ") + what);
  }
}

RadialTerms exponential_terms(double s, double l, double r2) {
  RadialTerms t;
  const double r = std::sqrt(r2);
  t.value = s * std::exp(-r / l);
  t.d_log_lengthscale = t.value * r / l;
  // The absolute exponential is not differentiable at r = 0; use the
  // symmetric subgradient there.
  t.input_weight = r > 0.0 ? -t.value / (l * r) : 0.0;
  return t;
}

}  // namespace

const char* to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::kRbf: return "rbf";
    case KernelFamily::kRationalQuadratic: return "rq";
    case KernelFamily::kAbsoluteExponential: return "absexp";
    case KernelFamily::kMatern: return "matern";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "rbf") return KernelFamily::kRbf;
  if (name == "rq") return KernelFamily::kRationalQuadratic;
  if (name == "absexp") return KernelFamily::kAbsoluteExponential;
  if (name == "matern") return KernelFamily::kMatern;
  fail(ErrorKind::kInvalidConfig, "unknown kernel family '" + name +
                                      "' (expected rbf, rq, absexp, matern)");
}

KernelConfig KernelConfig::make(KernelFamily family, double lengthscale,
                                double outputscale, double alpha, MaternNu nu) {
  if (!(lengthscale > 0.0) || !(outputscale > 0.0) || !(alpha > 0.0)) {
    fail(ErrorKind::kInvalidConfig,
         "kernel lengthscale, outputscale and alpha must be positive");
  }
  KernelConfig cfg;
  cfg.family = family;
  cfg.nu = nu;
  cfg.log_lengthscale = std::log(lengthscale);
  cfg.log_outputscale = std::log(outputscale);
  cfg.log_alpha = std::log(alpha);
  return cfg;
}

double KernelConfig::lengthscale() const { return std::exp(log_lengthscale); }
double KernelConfig::outputscale() const { return std::exp(log_outputscale); }
double KernelConfig::alpha() const { return std::exp(log_alpha); }

std::size_t KernelConfig::num_hyperparameters() const {
  return family == KernelFamily::kRationalQuadratic ? 3 : 2;
}

Vector KernelConfig::hyperparameters() const {
  Vector v(num_hyperparameters());
  v(0) = log_lengthscale;
  v(1) = log_outputscale;
  if (family == KernelFamily::kRationalQuadratic) v(2) = log_alpha;
  return v;
}

void KernelConfig::set_hyperparameters(const Vector& values) {
  if (static_cast<std::size_t>(values.size()) != num_hyperparameters()) {
    fail(ErrorKind::kInvalidInput, "kernel hyperparameter count mismatch");
  }
  log_lengthscale = values(0);
  log_outputscale = values(1);
  if (family == KernelFamily::kRationalQuadratic) log_alpha = values(2);
}

std::vector<std::string> KernelConfig::hyperparameter_names() const {
  std::vector<std::string> names{"log_lengthscale", "log_outputscale"};
  if (family == KernelFamily::kRationalQuadratic) names.emplace_back("log_alpha");
  return names;
}

RadialTerms radial_terms(const KernelConfig& cfg, double r2) {
  const double s = cfg.outputscale();
  const double l = cfg.lengthscale();
  const double l2 = l * l;
  RadialTerms t;
  switch (cfg.family) {
    case KernelFamily::kRbf: {
      t.value = s * std::exp(-0.5 * r2 / l2);
      t.d_log_lengthscale = t.value * r2 / l2;
      t.input_weight = -t.value / l2;
      return t;
    }
    case KernelFamily::kRationalQuadratic: {
      const double alpha = cfg.alpha();
      const double base = 1.0 + 0.5 * r2 / (alpha * l2);
      const double log_base = std::log(base);
      const double pow_a = std::exp(-alpha * log_base);
      const double pow_a1 = pow_a / base;
      t.value = s * pow_a;
      t.d_log_lengthscale = s * pow_a1 * r2 / l2;
      t.d_log_alpha = t.value * alpha * ((base - 1.0) / base - log_base);
      t.input_weight = -s * pow_a1 / l2;
      return t;
    }
    case KernelFamily::kAbsoluteExponential:
      return exponential_terms(s, l, r2);
    case KernelFamily::kMatern: {
      switch (cfg.nu) {
        case MaternNu::kHalf:
          return exponential_terms(s, l, r2);
        case MaternNu::kThreeHalves: {
          const double u = kSqrt3 * std::sqrt(r2) / l;
          const double e = std::exp(-u);
          t.value = s * (1.0 + u) * e;
          t.d_log_lengthscale = s * u * u * e;
          t.input_weight = -3.0 * s * e / l2;
          return t;
        }
        case MaternNu::kFiveHalves: {
          const double u = kSqrt5 * std::sqrt(r2) / l;
          const double e = std::exp(-u);
          t.value = s * (1.0 + u + u * u / 3.0) * e;
          t.d_log_lengthscale = s * (u * u / 3.0) * (1.0 + u) * e;
          t.input_weight = -5.0 * s * (1.0 + u) * e / (3.0 * l2);
          return t;
        }
      }
      break;
    }
  }
  fail(ErrorKind::kInvalidConfig, "unsupported kernel configuration");
}

double eval_kernel(const KernelConfig& cfg, const Point& a, const Point& b) {
  if (!a.allFinite() || !b.allFinite()) {
    fail(ErrorKind::kInvalidInput, "non-finite coordinate passed to kernel");
  }
  const double dx = a(0) - b(0);
  const double dy = a(1) - b(1);
  return radial_terms(cfg, dx * dx + dy * dy).value;
}

Matrix gram_matrix(const KernelConfig& cfg, const Points& a, const Points& b) {
  require_finite(a, "first point set");
  require_finite(b, "second point set");
  Matrix k(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double dx = a(i, 0) - b(j, 0);
      const double dy = a(i, 1) - b(j, 1);
      k(i, j) = radial_terms(cfg, dx * dx + dy * dy).value;
    }
  }
  return k;
}

std::vector<Matrix> kernel_gradients(const KernelConfig& cfg, const Points& a,
                                     const Points& b) {
  require_finite(a, "first point set");
  require_finite(b, "second point set");
  const std::size_t p = cfg.num_hyperparameters();
  std::vector<Matrix> grads(p, Matrix(a.rows(), b.rows()));
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double dx = a(i, 0) - b(j, 0);
      const double dy = a(i, 1) - b(j, 1);
      const RadialTerms t = radial_terms(cfg, dx * dx + dy * dy);
      grads[0](i, j) = t.d_log_lengthscale;
      grads[1](i, j) = t.value;
      if (p == 3) grads[2](i, j) = t.d_log_alpha;
    }
  }
  return grads;
}

}  // namespace tgp
