#pragma once

#include <stdexcept>
#include <string>

namespace tgp {

enum class ErrorKind {
  kInvalidInput,
  kInvalidConfig,
  kParse,
  kIo,
  kEmptyDataset,
  kIllConditioned,
  kTrainingDivergence,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid input";
    case ErrorKind::kInvalidConfig: return "invalid config";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kEmptyDataset: return "empty dataset";
    case ErrorKind::kIllConditioned: return "ill-conditioned kernel";
    case ErrorKind::kTrainingDivergence: return "training divergence";
  }
  return "unknown";
}

}  // namespace tgp
