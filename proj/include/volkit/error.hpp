#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace volkit {

enum class ErrorCode {
  kMalformedRow,
  kNonPositivePrice,
  kEmptyInput,
  kSeriesTooShort,
  kDegenerateSample,
  kLagOutOfRange,
  kSingularRegression,
  kInvalidShape,
  kPOutOfRange,
  kNoConvergence,
  kNonpositiveVariance,
  kNonFiniteLikelihood,
  kInfeasibleParams,
  kAllStartsFailed,
  kInvalidCounts,
  kAllFitsFailed,
  kMissingArtifact,
  kInvalidArgument,
};

/// Upper-case identifier, e.g. "NON_POSITIVE_PRICE".
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace volkit
