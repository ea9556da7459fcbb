#pragma once

#include <stdexcept>
#include <string>

namespace absurd {

// Error categories; the C API maps these 1:1 onto absurd_status codes and the
// CLI maps them onto exit codes (config/usage -> 1, runtime -> 2).
enum class ErrorKind {
  kInvalidArg,  // bad argument to an operation
  kConfig,      // invalid configuration / unknown world or ruleset
  kParse,       // malformed JSON, journal line, or provider response
  kIo,          // file or directory access failure
  kBackend,     // backend unreachable / exhausted retries at suite level
  kAuth,        // missing or rejected credential
  kInternal,    // invariant violation
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace absurd
