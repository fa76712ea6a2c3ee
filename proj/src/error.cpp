#include "opmap/error.hpp"

namespace opmap {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotAGenerator: return "NotAGenerator";
    case ErrorCode::UnstableD0: return "UnstableD0";
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::ConstraintViolated: return "ConstraintViolated";
    case ErrorCode::NegativeTime: return "NegativeTime";
    case ErrorCode::NegativeDuration: return "NegativeDuration";
    case ErrorCode::OutOfRangeQuantile: return "OutOfRangeQuantile";
    case ErrorCode::NonpositiveX: return "NonpositiveX";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NegativeValue: return "NegativeValue";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::Reducible: return "Reducible";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::DegenerateConditioning: return "DegenerateConditioning";
    case ErrorCode::SingularCorrection: return "SingularCorrection";
    case ErrorCode::InfiniteMoment: return "InfiniteMoment";
    case ErrorCode::OptimizerFailed: return "OptimizerFailed";
    case ErrorCode::NoFeasiblePoint: return "NoFeasiblePoint";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  return code <= ErrorCode::InvalidArgument;
}

}  // namespace opmap
