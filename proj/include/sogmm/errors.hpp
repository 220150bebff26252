#pragma once

#include <stdexcept>
#include <string>

namespace sogmm {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument, configuration value, or precondition violation.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// An operation received an input that contains no usable data
// (e.g. an image whose depth pixels are all invalid).
class EmptyInputError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

// File-system or file-format problems.
class IoError : public Error {
 public:
  using Error::Error;
};

class UnreadableFileError : public IoError {
 public:
  using IoError::IoError;
};

class UnsupportedFormatError : public IoError {
 public:
  using IoError::IoError;
};

class DimensionMismatchError : public IoError {
 public:
  using IoError::IoError;
};

class BadMagicError : public IoError {
 public:
  using IoError::IoError;
};

class VersionMismatchError : public IoError {
 public:
  using IoError::IoError;
};

class TruncatedFileError : public IoError {
 public:
  using IoError::IoError;
};

// Numerical failure (non-finite likelihood, degenerate linear algebra).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A query fell so far outside the model that every component underflowed.
class OutOfSupportError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace sogmm
