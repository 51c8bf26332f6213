#include "lfrect/errors.hpp"

namespace lfrect {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::kDegenerateDisparity: return "DegenerateDisparity";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kDegenerateSpread: return "DegenerateSpread";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kCoplanarDegeneracy: return "CoplanarDegeneracy";
    case ErrorCode::kSingularInput: return "SingularInput";
    case ErrorCode::kIllConditioned: return "IllConditioned";
    case ErrorCode::kNumericalFailure: return "NumericalFailure";
    case ErrorCode::kParallelRay: return "ParallelRay";
    case ErrorCode::kDegenerateSegment: return "DegenerateSegment";
    case ErrorCode::kZeroBaseline: return "ZeroBaseline";
    case ErrorCode::kCollinearConstruction: return "CollinearConstruction";
    case ErrorCode::kNoOverlap: return "NoOverlap";
    case ErrorCode::kOutOfAperture: return "OutOfAperture";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kBehindCamera: return "BehindCamera";
    case ErrorCode::kInsufficientObservations: return "InsufficientObservations";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace lfrect
