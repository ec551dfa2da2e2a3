#include "pdepth/errors.hpp"

namespace pdepth {

std::string_view error_class(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "input.invalid-argument";
    case ErrorCode::kShapeMismatch: return "input.shape-mismatch";
    case ErrorCode::kMalformedFile: return "input.malformed-file";
    case ErrorCode::kIo: return "input.io";
    case ErrorCode::kDomain: return "numeric.domain";
    case ErrorCode::kDegenerateGeometry: return "numeric.degenerate-geometry";
    case ErrorCode::kNoParallax: return "numeric.no-parallax";
    case ErrorCode::kBehindCamera: return "numeric.behind-camera";
    case ErrorCode::kExistence: return "numeric.condition-of-existence";
    case ErrorCode::kEmptyEvaluation: return "numeric.empty-evaluation";
    case ErrorCode::kNormalization: return "numeric.normalization";
    case ErrorCode::kDegenerateSetup: return "numeric.degenerate-setup";
  }
  return "unknown";
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kMalformedFile:
    case ErrorCode::kIo:
      return 2;
    default:
      return 3;
  }
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace pdepth
