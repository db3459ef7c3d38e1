#pragma once

#include <stdexcept>
#include <string>

namespace mcn {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible or invalid tensor/layer shapes, including element-count overflow.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A value violates an operation's contract (bad label, invalid one-hot row, ...).
class ValueError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content (PPM header, weight file magic, keypoint JSON, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Dataset-level problems: empty roots, impossible splits, degenerate crops.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values where the training loop requires finite ones.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace mcn
