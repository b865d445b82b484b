#include "qsemi/error.hpp"

namespace qsemi {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::BranchCut: return "BranchCut";
    case ErrorCode::SingularCos: return "SingularCos";
    case ErrorCode::SpectralRadiusTooLarge: return "SpectralRadiusTooLarge";
    case ErrorCode::ConjugatePointOnPath: return "ConjugatePointOnPath";
    case ErrorCode::InsufficientSteps: return "InsufficientSteps";
    case ErrorCode::NotAccretive: return "NotAccretive";
    case ErrorCode::SingularTransform: return "SingularTransform";
    case ErrorCode::DegenerateTime: return "DegenerateTime";
    case ErrorCode::PathFailure: return "PathFailure";
    case ErrorCode::NonIntegrableSymbol: return "NonIntegrableSymbol";
    case ErrorCode::NonIntegrableComposition: return "NonIntegrableComposition";
    case ErrorCode::NonIntegrable: return "NonIntegrable";
    case ErrorCode::SeriesRegimeViolated: return "SeriesRegimeViolated";
    case ErrorCode::NotRealWithinTol: return "NotRealWithinTol";
    case ErrorCode::NotPSDWithinTol: return "NotPSDWithinTol";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::TimeTooLarge: return "TimeTooLarge";
    case ErrorCode::RadiusExceeded: return "RadiusExceeded";
    case ErrorCode::GammaCollapsed: return "GammaCollapsed";
    case ErrorCode::GraphConditionFailed: return "GraphConditionFailed";
    case ErrorCode::TruncationTooLarge: return "TruncationTooLarge";
    case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorCode::ExponentOrder: return "ExponentOrder";
    case ErrorCode::NonPositiveSample: return "NonPositiveSample";
    case ErrorCode::FixtureHasGraph: return "FixtureHasGraph";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::VerificationFailed: return "VerificationFailed";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string module, std::string operation, const std::string& detail)
    : std::runtime_error(module + "::" + operation + ": " + to_string(code) +
                         (detail.empty() ? std::string() : " (" + detail + ")")),
      code_(code),
      module_(std::move(module)),
      operation_(std::move(operation)),
      detail_(detail) {}

}  // namespace qsemi
