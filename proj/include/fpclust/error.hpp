#pragma once

#include <stdexcept>
#include <string>

namespace fpclust {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (ragged rows, bad header).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A cell that could not be parsed as a number.
class ParseError : public FormatError {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& cell)
      : FormatError("cannot parse '" + cell + "' as a number at row " + std::to_string(row) +
                    ", column " + std::to_string(column)),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// Shapes or sizes that violate a contract.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or argument value.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown: rank deficiency, non-finite state, sampler failure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fpclust
