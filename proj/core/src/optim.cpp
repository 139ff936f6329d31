#include "tgp/optim.hpp"

#include <algorithm>
#include <cmath>

#include "tgp/error.hpp"

namespace tgp {

Adam::Adam(const AdamConfig& cfg, Eigen::Index dim)
    : cfg_(cfg), m_(Vector::Zero(dim)), v_(Vector::Zero(dim)) {
  if (!(cfg.learning_rate >= 0.0) || !(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) ||
      !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0) || !(cfg.epsilon > 0.0)) {
    fail(ErrorKind::kInvalidConfig, "invalid Adam configuration");
  }
}

void Adam::step(Vector& params, const Vector& grad,
                std::span<const std::string> names) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    fail(ErrorKind::kInvalidInput, "Adam: parameter/gradient size mismatch");
  }
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad(i))) {
      const std::string who =
          static_cast<std::size_t>(i) < names.size()
              ? names[static_cast<std::size_t>(i)]
              : "parameter " + std::to_string(i);
      fail(ErrorKind::kTrainingDivergence,
           "non-finite gradient for " + who + " at step " +
               std::to_string(t_ + 1));
    }
  }
  ++t_;
  const double b1 = cfg_.beta1;
  const double b2 = cfg_.beta2;
  m_ = b1 * m_ + (1.0 - b1) * grad;
  v_ = b2 * v_ + (1.0 - b2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double m_hat = m_(i) / c1;
    const double v_hat = v_(i) / c2;
    params(i) -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
  }
}

void Adam::write(BinaryWriter& out) const {
  out.f64(cfg_.learning_rate);
  out.f64(cfg_.beta1);
  out.f64(cfg_.beta2);
  out.f64(cfg_.epsilon);
  out.u64(cfg_.max_epochs);
  out.u64(cfg_.batch_size);
  out.u64(t_);
  out.vec(m_);
  out.vec(v_);
}

Adam Adam::read(BinaryReader& in) {
  Adam a;
  a.cfg_.learning_rate = in.f64();
  a.cfg_.beta1 = in.f64();
  a.cfg_.beta2 = in.f64();
  a.cfg_.epsilon = in.f64();
  a.cfg_.max_epochs = in.u64();
  a.cfg_.batch_size = in.u64();
  a.t_ = in.u64();
  a.m_ = in.vec();
  a.v_ = in.vec();
  if (a.m_.size() != a.v_.size()) {
    fail(ErrorKind::kParse, "Adam state moment sizes differ");
  }
  return a;
}

Vector numeric_gradient(const ScalarFunction& f, const Vector& x, double h) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + h;
    const double up = f(probe);
    probe(i) = x(i) - h;
    const double down = f(probe);
    probe(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

double check_gradient(const ScalarFunction& f, const Vector& x,
                      const Vector& analytic, double h) {
  if (analytic.size() != x.size()) {
    fail(ErrorKind::kInvalidInput, "check_gradient: size mismatch");
  }
  const Vector numeric = numeric_gradient(f, x, h);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double err = std::abs(analytic(i) - numeric(i)) /
                       std::max(1.0, std::abs(numeric(i)));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace tgp
