#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mft {

enum class ErrorCode {
  DimensionTooSmall,
  MethodInfeasible,
  OutOfSimplex,
  OutOfDomain,
  QuadratureFailure,
  BoundaryMagnetization,
  BracketInvalid,
  NoAsymmetricBranch,
  WindowExcludesTransition,
  BudgetExceeded,
  InvalidConfig,
  InvalidArgument,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::MethodInfeasible: return "MethodInfeasible";
    case ErrorCode::OutOfSimplex: return "OutOfSimplex";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::BoundaryMagnetization: return "BoundaryMagnetization";
    case ErrorCode::BracketInvalid: return "BracketInvalid";
    case ErrorCode::NoAsymmetricBranch: return "NoAsymmetricBranch";
    case ErrorCode::WindowExcludesTransition: return "WindowExcludesTransition";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mft
