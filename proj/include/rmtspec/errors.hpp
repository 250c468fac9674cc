#pragma once

#include <stdexcept>
#include <string>

namespace rmtspec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed NPY magic/header or manifest JSON.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Wrong dimensionality or a shape that disagrees with its declaration.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite entries.
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Eigensolver or optimizer failure.
class NumericError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Fit is not identifiable: a collapsed MP bulk, or an equal-valued tail.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A metric whose denominator vanishes (zero matrix).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class UnclassifiableError : public Error {
 public:
  using Error::Error;
};

}  // namespace rmtspec
