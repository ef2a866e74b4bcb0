#pragma once

#include <stdexcept>
#include <string>

namespace gpelab {

/// Failure categories shared by every module. The numeric values are part of
/// the C API (see gpelab.h) and must not be reordered.
enum class ErrorCode : int {
  InvalidArgument = 1,
  ZeroField = 2,
  NoBracket = 3,
  NotConverged = 4,
  OutOfRange = 5,
  GridMismatch = 6,
  UnderResolved = 7,
  OutOfRegime = 8,
  TailUnresolved = 9,
  DegenerateInput = 10,
  InsufficientPoints = 11,
  CollapseDetected = 12,
  Io = 13,
  Parse = 14,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace gpelab
