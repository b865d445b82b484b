#pragma once

#include <stdexcept>
#include <string>

namespace qsemi {

enum class ErrorCode {
  NonSquare,
  DimensionMismatch,
  NonFinite,
  BranchCut,
  SingularCos,
  SpectralRadiusTooLarge,
  ConjugatePointOnPath,
  InsufficientSteps,
  NotAccretive,
  SingularTransform,
  DegenerateTime,
  PathFailure,
  NonIntegrableSymbol,
  NonIntegrableComposition,
  NonIntegrable,
  SeriesRegimeViolated,
  NotRealWithinTol,
  NotPSDWithinTol,
  NewtonDiverged,
  TimeTooLarge,
  RadiusExceeded,
  GammaCollapsed,
  GraphConditionFailed,
  TruncationTooLarge,
  ResolutionTooCoarse,
  ExponentOrder,
  NonPositiveSample,
  FixtureHasGraph,
  ParseError,
  VerificationFailed,
};

const char* to_string(ErrorCode code);

// Every failure carries the module and operation that raised it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, std::string operation, const std::string& detail);

  ErrorCode code() const { return code_; }
  const std::string& module() const { return module_; }
  const std::string& operation() const { return operation_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string module_;
  std::string operation_;
  std::string detail_;
};

}  // namespace qsemi
