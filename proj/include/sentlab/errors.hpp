#pragma once

#include <stdexcept>
#include <string>

namespace sentlab {

// Bad flags, unknown keys, malformed config values. CLI maps this to exit 1.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Missing/unreadable files, malformed datasets, degenerate inputs.
// CLI maps this to exit 2.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// NaN/Inf surfacing from numeric code; message carries the location.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Checkpoint I/O failures, one kind per failure mode so callers can tell
// them apart.
struct CheckpointError : std::runtime_error {
  enum class Kind { BadMagic, BadVersion, Truncated, BadDims, Io };
  Kind kind;
  CheckpointError(Kind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
};

}  // namespace sentlab
