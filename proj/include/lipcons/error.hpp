#pragma once

#include <stdexcept>
#include <string>

namespace lipcons {

// Numeric values double as the C API status codes and CLI exit codes.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kPrecondition = 2,
  kInfeasible = 3,
  kBlowUp = 4,
  kParse = 5,
  kNumeric = 6,
  kIo = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace lipcons
