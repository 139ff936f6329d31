#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "tgp/types.hpp"

namespace tgp {

double rmse(const Vector& pred, const Vector& truth);

// Mean negative Gaussian log density of truth under N(mean, var).
double nlpd(const Vector& mean, const Vector& var, const Vector& truth);

struct SparsificationCurves {
  Vector fractions;
  Vector model;   // MAE after dropping the most uncertain points
  Vector oracle;  // MAE after dropping the largest errors
};

// For each fraction a, drops floor(a * q) points and reports the MAE of the
// rest. Ties in the sort key are removed in ascending index order.
SparsificationCurves sparsification(const Vector& abs_err, const Vector& uncertainty,
                                    const Vector& fractions);

inline constexpr int kAuseSteps = 50;

// a_j = j / 50 for j = 0..49.
Vector ause_fractions();

// Trapezoidal area between the model and oracle sparsification curves over
// ause_fractions(). With normalized=true both curves are divided by the full
// MAE first.
double ause(const Vector& abs_err, const Vector& uncertainty, bool normalized = false);

struct EvalOptions {
  bool ause_normalized = false;
  // Label for the variance that fed NLPD and AUSE ("predictive" or "latent").
  std::string variance_kind = "predictive";
};

struct EvalReport {
  double rmse = 0.0;
  double nlpd = 0.0;
  double ause = 0.0;
  std::size_t n_test = 0;
  std::string variance_kind;
  bool ause_normalized = false;
  // NLPD under the latent variance when it was supplied alongside.
  std::optional<double> nlpd_latent;
  SparsificationCurves curves;
};

EvalReport evaluate(const Vector& mean, const Vector& var, const Vector& truth,
                    const EvalOptions& options = {});

// `metric=value` lines with keys rmse, nlpd, ause, n_test, preceded by a
// '#' comment recording the variance kind and AUSE normalization, and a
// '# nlpd_latent=' comment when that value is present.
std::string format_report(const EvalReport& report);
// Parses the key/value lines back. Comment lines are ignored apart from
// '# nlpd_latent='.
EvalReport parse_report(const std::string& text);
void write_report(const EvalReport& report, const std::filesystem::path& path);
// CSV: fraction,model_mae,oracle_mae
void write_curves_csv(const EvalReport& report, const std::filesystem::path& path);

}  // namespace tgp
