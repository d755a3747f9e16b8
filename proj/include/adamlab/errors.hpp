#pragma once

#include <stdexcept>
#include <string>

namespace adamlab {

// Failure classes that map onto process exit codes in the CLI. Precondition
// violations on in-memory inputs use the standard std::invalid_argument /
// std::domain_error instead.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Iterative solver or simulation failed to produce a usable number.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A persisted file failed validation.
struct CorruptionError : std::runtime_error {
  enum class Reason { BadMagic, UnsupportedVersion, Truncated, ChecksumMismatch, Malformed };
  CorruptionError(Reason r, const std::string& what) : std::runtime_error(what), reason(r) {}
  Reason reason;
};

/// Requested operation has no meaning for the given variant or parameters.
struct UnsupportedError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace adamlab
