#include "core/error.hpp"

namespace gpelab {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroField: return "ZeroField";
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::UnderResolved: return "UnderResolved";
    case ErrorCode::OutOfRegime: return "OutOfRegime";
    case ErrorCode::TailUnresolved: return "TailUnresolved";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::CollapseDetected: return "CollapseDetected";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace gpelab
