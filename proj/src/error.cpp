#include "volkit/error.hpp"

namespace volkit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kMalformedRow: return "MALFORMED_ROW";
    case ErrorCode::kNonPositivePrice: return "NON_POSITIVE_PRICE";
    case ErrorCode::kEmptyInput: return "EMPTY_INPUT";
    case ErrorCode::kSeriesTooShort: return "SERIES_TOO_SHORT";
    case ErrorCode::kDegenerateSample: return "DEGENERATE_SAMPLE";
    case ErrorCode::kLagOutOfRange: return "LAG_OUT_OF_RANGE";
    case ErrorCode::kSingularRegression: return "SINGULAR_REGRESSION";
    case ErrorCode::kInvalidShape: return "INVALID_SHAPE";
    case ErrorCode::kPOutOfRange: return "P_OUT_OF_RANGE";
    case ErrorCode::kNoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::kNonpositiveVariance: return "NONPOSITIVE_VARIANCE";
    case ErrorCode::kNonFiniteLikelihood: return "NON_FINITE_LIKELIHOOD";
    case ErrorCode::kInfeasibleParams: return "INFEASIBLE_PARAMS";
    case ErrorCode::kAllStartsFailed: return "ALL_STARTS_FAILED";
    case ErrorCode::kInvalidCounts: return "INVALID_COUNTS";
    case ErrorCode::kAllFitsFailed: return "ALL_FITS_FAILED";
    case ErrorCode::kMissingArtifact: return "MISSING_ARTIFACT";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace volkit
