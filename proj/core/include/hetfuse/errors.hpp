#pragma once

#include <stdexcept>
#include <string>

namespace hetfuse {

// Input violates a documented precondition (bad shape, bad value range,
// malformed file). The CLI maps these to exit status 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A subject id appears on both sides of a train/validation split.
class LeakageError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Failures that are not the caller's fault (I/O, numerical breakdown).
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hetfuse
