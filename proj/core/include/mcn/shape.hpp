#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "mcn/error.hpp"

namespace mcn {

/// Extents of a dense row-major tensor. Every extent is >= 1 and the element
/// count must be representable in a signed 64-bit integer. A rank-0 shape is a
/// scalar with one element.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::int64_t> dims)
      : Shape(std::vector<std::int64_t>(dims)) {}
  explicit Shape(std::vector<std::int64_t> dims);

  std::int64_t rank() const { return static_cast<std::int64_t>(dims_.size()); }
  std::int64_t operator[](std::int64_t axis) const { return dims_[static_cast<std::size_t>(axis)]; }
  std::int64_t numel() const { return numel_; }
  const std::vector<std::int64_t>& dims() const { return dims_; }

  bool operator==(const Shape& other) const { return dims_ == other.dims_; }
  bool operator!=(const Shape& other) const { return !(*this == other); }

  /// Renders as "[2,3,4]" for error messages.
  std::string str() const;

 private:
  std::vector<std::int64_t> dims_;
  std::int64_t numel_ = 1;
};

}  // namespace mcn
