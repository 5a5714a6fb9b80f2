#pragma once

#include <stdexcept>
#include <string>

namespace ctrkd {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration or precondition violation (bad schedule, empty
// training window, misaligned comparison inputs, ...).
struct ConfigError : Error {
  using Error::Error;
};

// A categorical value that is not present in a vocabulary where the caller
// required strict lookup.
struct OovError : Error {
  using Error::Error;
};

// Mismatched tensor/batch shapes or field sets.
struct ShapeError : Error {
  using Error::Error;
};

// Non-finite values where finite math is required (e.g. gradients).
struct NumericError : Error {
  using Error::Error;
};

// Malformed dataset or report file. Message carries path/line/reason.
struct DataFormatError : Error {
  using Error::Error;
};

struct CheckpointError : Error {
  enum class Kind { Io, BadMagic, Version, Corrupt, Truncated };
  CheckpointError(Kind k, const std::string& msg) : Error(msg), kind(k) {}
  Kind kind;
};

}  // namespace ctrkd
