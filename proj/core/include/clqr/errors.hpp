#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace clqr {

enum class ErrorKind {
  ParseError,
  ValidationFailed,
  NonConvergence,
  SingularStageHessian,
  DegenerateSet,
  CapExceeded,
  NotConverged,
  UnstableSystem,
  CurvatureOverflow,
  MaxIterExceeded,
  SingularKKT,
  OracleMismatch,
  NotFound,
  Infeasible,
  StepInfeasible,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (and the
/// CLI exit-code mapping) can branch without parsing messages.
class ClqrError : public std::runtime_error {
 public:
  ClqrError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationFailed: return "ValidationFailed";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::SingularStageHessian: return "SingularStageHessian";
    case ErrorKind::DegenerateSet: return "DegenerateSet";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::UnstableSystem: return "UnstableSystem";
    case ErrorKind::CurvatureOverflow: return "CurvatureOverflow";
    case ErrorKind::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorKind::SingularKKT: return "SingularKKT";
    case ErrorKind::OracleMismatch: return "OracleMismatch";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::StepInfeasible: return "StepInfeasible";
  }
  return "Unknown";
}

}  // namespace clqr
