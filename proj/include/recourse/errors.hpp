#pragma once

#include <stdexcept>
#include <string>

namespace recourse {

// Base of every error raised by the library.
class RecourseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector or matrix lengths that do not line up.
class DimensionError : public RecourseError {
 public:
  using RecourseError::RecourseError;
};

// Malformed numeric input (non-finite values, out-of-range parameters).
class InvalidInput : public RecourseError {
 public:
  using RecourseError::RecourseError;
};

// Unusable experiment or CLI configuration.
class ConfigError : public RecourseError {
 public:
  using RecourseError::RecourseError;
};

// Problems with dataset files or their contents.
class DataError : public RecourseError {
 public:
  using RecourseError::RecourseError;
};

}  // namespace recourse
