#pragma once

#include <stdexcept>
#include <string>

namespace marlids {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument: shape mismatch, non-finite input, unknown label, empty set.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A configuration value outside its admissible range.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyBufferError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// File could not be read or written, or its content could not be parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; carries the 1-based row the problem was found on.
class IngestError : public IoError {
 public:
  IngestError(const std::string& file, std::size_t row, const std::string& what)
      : IoError(file + ":" + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

/// Bad magic, unsupported version or digest mismatch in a container file.
class CorruptContainerError : public IoError {
 public:
  using IoError::IoError;
};

/// Model and dataset (or two models) disagree on feature dim or labels.
class IncompatibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace marlids
