#include "tgp/linalg.hpp"

#include <cmath>
#include <string>

#include "tgp/error.hpp"

namespace tgp {
namespace {

bool factor_ok(const Eigen::LLT<Matrix>& llt) {
  if (llt.info() != Eigen::Success) return false;
  const auto diag = llt.matrixLLT().diagonal();
  return diag.allFinite() && (diag.array() > 0.0).all();
}

}  // namespace

double JitteredCholesky::log_determinant() const {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Matrix JitteredCholesky::inverse() const {
  const Eigen::Index n = llt.matrixLLT().rows();
  Matrix inv = Matrix::Identity(n, n);
  llt.solveInPlace(inv);
  return inv;
}

JitteredCholesky jittered_cholesky(const Matrix& a, std::string_view what) {
  JitteredCholesky out;
  if (!a.allFinite()) {
    fail(ErrorKind::kIllConditioned,
         std::string(what) + ": matrix has non-finite entries");
  }
  out.llt.compute(a);
  if (factor_ok(out.llt)) return out;
  for (double jitter = kFirstJitter; jitter <= kMaxJitter * 1.0000001;
       jitter *= 10.0) {
    Matrix shifted = a;
    shifted.diagonal().array() += jitter;
    out.llt.compute(shifted);
    if (factor_ok(out.llt)) {
      out.jitter = jitter;
      return out;
    }
  }
  fail(ErrorKind::kIllConditioned,
       std::string(what) + ": Cholesky failed with jitter up to 1e-3");
}

}  // namespace tgp
