#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace awvd {

enum class ErrorCode {
  IndexOrder,
  DegenerateSites,
  DegenerateGamma,
  NotOnCommonRay,
  OutOfRange,
  EmptyInput,
  OutOfRoot,
  CubeOutsideRoot,
  EmptyOverlap,
  RefinementDepthExceeded,
  EmptyBallList,
  CoincidentPoints,
  BudgetExceeded,
  Parse,
};

std::string_view to_string(ErrorCode code) noexcept;

/// All library failures are reported through this exception; `code()` tells
/// callers (and the CLI exit-code mapping) which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace awvd
