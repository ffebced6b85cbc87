#pragma once

#include <stdexcept>
#include <string>

namespace gradfeat {

// Base class for every error raised by the library. Each failure mode has
// its own type so callers can match on the condition rather than the
// message text.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shape disagreement between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Input violates an operation's value-domain precondition.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (image headers, base64 payloads, ...).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Filesystem-level failure (missing file, unwritable path).
class IoError : public Error {
 public:
  using Error::Error;
};

// Dataset manifest fails validation; message lists every violation.
class ManifestError : public Error {
 public:
  using Error::Error;
};

// Checkpoint cannot be decoded or verified.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

// Gradient projection matrix is identically zero.
class DegenerateProjectionError : public Error {
 public:
  using Error::Error;
};

// Correlation requested on a constant vector.
class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

// Training loss became non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace gradfeat
