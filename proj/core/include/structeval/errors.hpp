#pragma once

#include <stdexcept>
#include <string>

namespace structeval {

enum class ErrorKind {
  Config,          // bad flags, malformed config files, missing template slots
  Parse,           // malformed record files (message carries the line number)
  Io,              // filesystem failures
  NoCoreToken,     // no token of the question matches the core pool/predicates
  NoSurfaceToken,  // no usable non-core token for a surface-only edit
  NotEnoughTokens, // question too short for the requested edit
  Pairing,         // T1/T0 record sets do not line up
  Transport,       // endpoint unreachable after bounded retries
  Undefined,       // estimate requested from data that cannot define it
  Degenerate,      // degenerate numeric input (constant series, zero variance)
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace structeval
