#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace floq {

// Failure classes surfaced by the numerical kernels. The CLI maps
// config_error to exit code 2 and everything else to exit code 3.
enum class errc {
  root_polish_failure,
  bisection_failure,
  eigen_failure,
  degenerate_derivative,
  non_positive_delta,
  branch_point_evaluation,
  quadrature_failure,
  no_sign_change,
  cone_violation,
  step_rejected,
  insufficient_data,
  config_error,
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::root_polish_failure: return "RootPolishFailure";
    case errc::bisection_failure: return "BisectionFailure";
    case errc::eigen_failure: return "EigenFailure";
    case errc::degenerate_derivative: return "DegenerateDerivative";
    case errc::non_positive_delta: return "NonPositiveDelta";
    case errc::branch_point_evaluation: return "BranchPointEvaluation";
    case errc::quadrature_failure: return "QuadratureFailure";
    case errc::no_sign_change: return "NoSignChange";
    case errc::cone_violation: return "ConeViolation";
    case errc::step_rejected: return "StepRejected";
    case errc::insufficient_data: return "InsufficientData";
    case errc::config_error: return "ConfigError";
  }
  return "Error";
}

[[noreturn]] inline void raise(errc code, const std::string& msg) {
  throw Error(code, std::string(errc_name(code)) + ": " + msg);
}

// Non-fatal diagnostics (e.g. eigenvector continuation on a coarse grid).
// Collected by value so results stay usable after a warning.
using WarningList = std::vector<std::string>;

}  // namespace floq
