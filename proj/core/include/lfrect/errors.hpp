#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lfrect {

enum class ErrorCode {
  kInvalidArgument,
  kNonPositiveDepth,
  kDegenerateDisparity,
  kZeroVector,
  kDegenerateSpread,
  kRankDeficient,
  kCoplanarDegeneracy,
  kSingularInput,
  kIllConditioned,
  kNumericalFailure,
  kParallelRay,
  kDegenerateSegment,
  kZeroBaseline,
  kCollinearConstruction,
  kNoOverlap,
  kOutOfAperture,
  kIndexOutOfRange,
  kBehindCamera,
  kInsufficientObservations,
  kParseError,
  kIoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception type thrown by every lfrect operation. The code identifies the
/// failure class so callers (and the CLI exit-code mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace lfrect
