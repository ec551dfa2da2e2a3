#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pdepth {

// Machine-readable failure classes. Each maps onto a CLI exit status:
// input problems exit with 2, numeric/domain problems with 3.
enum class ErrorCode {
  kInvalidArgument,     // malformed value handed to an API
  kShapeMismatch,
  kMalformedFile,       // header/payload/format violations
  kIo,
  kDomain,              // value outside an operation's domain
  kDegenerateGeometry,  // ray rotated onto or behind the image plane
  kNoParallax,          // translation gives no parallax at this pixel
  kBehindCamera,
  kExistence,           // z <= c: no positive parallax exists
  kEmptyEvaluation,
  kNormalization,
  kDegenerateSetup,
};

std::string_view error_class(ErrorCode code);
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace pdepth
