#pragma once

#include <stdexcept>
#include <string>

namespace forestjudge {

enum class ErrorCode {
  invalid_argument,  // bad input value or malformed request
  not_found,         // unknown sentence id, property key, file
  parse_error,       // malformed grammar, tree, corpus or script text
  conflict,          // concurrent or stale write
  io_error,
};

// All library failures are reported with this exception. The code lets the
// HTTP layer pick a status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace forestjudge
