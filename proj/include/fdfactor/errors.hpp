#pragma once

#include <stdexcept>
#include <string>

namespace fdf {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, wrong shapes, arguments outside their domain.
/// The CLI maps this family to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

class FormatError : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : InputError(what), row_(row), column_(column) {}

  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

class OrderError : public InputError {
 public:
  using InputError::InputError;
};

class DomainError : public InputError {
 public:
  using InputError::InputError;
};

class SelectionError : public InputError {
 public:
  using InputError::InputError;
};

/// Numerical failure or a degenerate result. The CLI maps this family to
/// exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DegenerateVarianceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace fdf
