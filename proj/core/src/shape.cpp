#include "mcn/shape.hpp"

#include <sstream>

namespace mcn {

Shape::Shape(std::vector<std::int64_t> dims) : dims_(std::move(dims)) {
  std::int64_t count = 1;
  for (std::int64_t d : dims_) {
    if (d < 1) {
      throw ShapeError("shape extent must be >= 1, got " + std::to_string(d));
    }
    if (__builtin_mul_overflow(count, d, &count)) {
      throw ShapeError("shape element count overflows 64-bit range");
    }
  }
  numel_ = count;
}

std::string Shape::str() const {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i != 0) out << ',';
    out << dims_[i];
  }
  out << ']';
  return out.str();
}

}  // namespace mcn
