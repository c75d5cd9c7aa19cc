#pragma once

#include <stdexcept>
#include <string>

namespace ellot {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller-side mistakes: out-of-range arguments, mismatched dimensions,
/// malformed specifications.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};

class SymmetryError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A pair of distributions for which no closed form is available.
class UnsupportedPair : public Error {
 public:
  using Error::Error;
};

/// Numerical failures: singular or indefinite matrices, divergent moments.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NotPsdError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InfiniteMomentError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace ellot
