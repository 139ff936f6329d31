#include "tgp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>
#include <vector>

#include "tgp/error.hpp"

namespace tgp {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;

void require_same_length(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    fail(ErrorKind::kInvalidInput, std::string(what) + ": length mismatch (" +
                                       std::to_string(a.size()) + " vs " +
                                       std::to_string(b.size()) + ")");
  }
}

// Indices sorted by key descending; equal keys keep ascending index order.
std::vector<Eigen::Index> removal_order(const Vector& key) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(key.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return key(a) > key(b); });
  return idx;
}

double remaining_mae(const Vector& abs_err, const std::vector<Eigen::Index>& order,
                     std::size_t removed) {
  const std::size_t q = order.size();
  if (removed >= q) return 0.0;
  double sum = 0.0;
  for (std::size_t i = removed; i < q; ++i) sum += abs_err(order[i]);
  return sum / static_cast<double>(q - removed);
}

}  // namespace

double rmse(const Vector& pred, const Vector& truth) {
  require_same_length(pred, truth, "rmse");
  if (pred.size() == 0) fail(ErrorKind::kInvalidInput, "rmse of an empty set");
  return std::sqrt((pred - truth).squaredNorm() / static_cast<double>(pred.size()));
}

double nlpd(const Vector& mean, const Vector& var, const Vector& truth) {
  require_same_length(mean, truth, "nlpd");
  require_same_length(var, truth, "nlpd");
  if (mean.size() == 0) fail(ErrorKind::kInvalidInput, "nlpd of an empty set");
  double total = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    if (!(var(i) > 0.0)) {
      fail(ErrorKind::kInvalidInput,
           "predictive variance at index " + std::to_string(i) + " is not positive");
    }
    const double r = truth(i) - mean(i);
    total += 0.5 * (kLog2Pi + std::log(var(i))) + r * r / (2.0 * var(i));
  }
  return total / static_cast<double>(mean.size());
}

SparsificationCurves sparsification(const Vector& abs_err, const Vector& uncertainty,
                                    const Vector& fractions) {
  require_same_length(abs_err, uncertainty, "sparsification");
  const auto q = static_cast<std::size_t>(abs_err.size());
  const std::vector<Eigen::Index> by_uncertainty = removal_order(uncertainty);
  const std::vector<Eigen::Index> by_error = removal_order(abs_err);
  SparsificationCurves out;
  out.fractions = fractions;
  out.model.resize(fractions.size());
  out.oracle.resize(fractions.size());
  for (Eigen::Index j = 0; j < fractions.size(); ++j) {
    const double a = fractions(j);
    if (!(a >= 0.0 && a < 1.0)) {
      fail(ErrorKind::kInvalidInput, "sparsification fractions must lie in [0, 1)");
    }
    // The small slack keeps floor(j/50 * q) exact despite rounding in j/50.
    const auto removed = static_cast<std::size_t>(std::floor(a * static_cast<double>(q) + 1e-9));
    out.model(j) = remaining_mae(abs_err, by_uncertainty, removed);
    out.oracle(j) = remaining_mae(abs_err, by_error, removed);
  }
  return out;
}

Vector ause_fractions() {
  Vector f(kAuseSteps);
  for (int j = 0; j < kAuseSteps; ++j) f(j) = static_cast<double>(j) / kAuseSteps;
  return f;
}

double ause(const Vector& abs_err, const Vector& uncertainty, bool normalized) {
  if (abs_err.size() < 2) fail(ErrorKind::kInvalidInput, "AUSE needs at least two points");
  SparsificationCurves c = sparsification(abs_err, uncertainty, ause_fractions());
  if (normalized) {
    const double full = c.oracle(0);
    if (full > 0.0) {
      c.model /= full;
      c.oracle /= full;
    }
  }
  const Vector diff = c.model - c.oracle;
  const double h = 1.0 / kAuseSteps;
  double area = 0.0;
  for (Eigen::Index j = 0; j + 1 < diff.size(); ++j) {
    area += 0.5 * (diff(j) + diff(j + 1)) * h;
  }
  return area;
}

EvalReport evaluate(const Vector& mean, const Vector& var, const Vector& truth,
                    const EvalOptions& options) {
  EvalReport r;
  r.rmse = rmse(mean, truth);
  r.nlpd = nlpd(mean, var, truth);
  const Vector abs_err = (mean - truth).cwiseAbs();
  r.ause = ause(abs_err, var, options.ause_normalized);
  r.curves = sparsification(abs_err, var, ause_fractions());
  if (options.ause_normalized && r.curves.oracle(0) > 0.0) {
    const double full = r.curves.oracle(0);
    r.curves.model /= full;
    r.curves.oracle /= full;
  }
  r.n_test = static_cast<std::size_t>(mean.size());
  r.variance_kind = options.variance_kind;
  r.ause_normalized = options.ause_normalized;
  return r;
}

std::string format_report(const EvalReport& report) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof(buf), "# variance=%s ause_normalized=%s\n",
                report.variance_kind.c_str(), report.ause_normalized ? "true" : "false");
  out += buf;
  if (report.nlpd_latent) {
    std::snprintf(buf, sizeof(buf), "# nlpd_latent=%.17g\n", *report.nlpd_latent);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "rmse=%.17g\nnlpd=%.17g\nause=%.17g\nn_test=%zu\n",
                report.rmse, report.nlpd, report.ause, report.n_test);
  out += buf;
  return out;
}

EvalReport parse_report(const std::string& text) {
  EvalReport r;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  int seen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    constexpr std::string_view kLatent = "# nlpd_latent=";
    if (line.rfind(kLatent, 0) == 0) {
      try {
        r.nlpd_latent = std::stod(line.substr(kLatent.size()));
      } catch (const std::logic_error&) {
        fail(ErrorKind::kParse, "report line " + std::to_string(line_no) + ": bad value");
      }
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::kParse, "report line " + std::to_string(line_no) + ": missing '='");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "rmse") r.rmse = std::stod(value);
      else if (key == "nlpd") r.nlpd = std::stod(value);
      else if (key == "ause") r.ause = std::stod(value);
      else if (key == "n_test") r.n_test = std::stoull(value);
      else fail(ErrorKind::kParse, "report line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      fail(ErrorKind::kParse, "report line " + std::to_string(line_no) + ": bad value");
    }
    ++seen;
  }
  if (seen != 4) fail(ErrorKind::kParse, "report must contain rmse, nlpd, ause, n_test");
  return r;
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << format_report(report);
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

void write_curves_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << "fraction,model_mae,oracle_mae\n";
  char buf[128];
  for (Eigen::Index j = 0; j < report.curves.fractions.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", report.curves.fractions(j),
                  report.curves.model(j), report.curves.oracle(j));
    out << buf;
  }
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

}  // namespace tgp
