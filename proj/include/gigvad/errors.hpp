#pragma once

#include <stdexcept>
#include <string>

namespace gigvad {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor extents disagree, or a reduction group is empty.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A configuration value is out of its admissible range (k, p, C, lambda...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value was produced or supplied.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read, written, or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint failed one of its integrity checks.
class CorruptCheckpointError : public IoError {
 public:
  using IoError::IoError;
};

/// A metric is undefined for the given input (e.g. AUC with one class only).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace gigvad
