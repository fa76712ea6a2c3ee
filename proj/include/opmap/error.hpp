#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace opmap {

enum class ErrorCode {
  // input validation
  NotAGenerator,
  UnstableD0,
  NegativeRate,
  ConstraintViolated,
  NegativeTime,
  NegativeDuration,
  OutOfRangeQuantile,
  NonpositiveX,
  TooShort,
  EmptyTrace,
  InsufficientData,
  ParseError,
  NegativeValue,
  EmptyFile,
  InvalidArgument,
  // numerical
  SingularSystem,
  Reducible,
  DegenerateVariance,
  DegenerateConditioning,
  SingularCorrection,
  InfiniteMoment,
  OptimizerFailed,
  NoFeasiblePoint,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by bad input rather than by the numerics.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace opmap
