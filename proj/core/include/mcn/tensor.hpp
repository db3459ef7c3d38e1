#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "mcn/error.hpp"
#include "mcn/parallel.hpp"
#include "mcn/shape.hpp"

namespace mcn {

/// Dense N-dimensional array with row-major layout (last axis fastest).
/// Images are [height, width, channels]; batches are [batch, h, w, channels].
/// The engine stores values as float; the double instantiation exists for the
/// finite-difference gradient checks.
template <typename T>
class TensorT {
 public:
  TensorT() : data_(1, T(0)) {}
  explicit TensorT(Shape shape, T fill = T(0))
      : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_.numel()), fill) {}

  static TensorT full(Shape shape, T fill) { return TensorT(std::move(shape), fill); }
  static TensorT zeros(Shape shape) { return TensorT(std::move(shape), T(0)); }

  const Shape& shape() const { return shape_; }
  std::int64_t rank() const { return shape_.rank(); }
  std::int64_t extent(std::int64_t axis) const { return shape_[axis]; }
  std::int64_t numel() const { return shape_.numel(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return {data_.data(), data_.size()}; }
  std::span<const T> values() const { return {data_.data(), data_.size()}; }

  T& operator[](std::int64_t flat) { return data_[static_cast<std::size_t>(flat)]; }
  T operator[](std::int64_t flat) const { return data_[static_cast<std::size_t>(flat)]; }

  /// Bounds-checked multi-index access; intended for tests and fixtures.
  T& at(std::initializer_list<std::int64_t> idx) { return data_[checked_flat(idx)]; }
  T at(std::initializer_list<std::int64_t> idx) const { return data_[checked_flat(idx)]; }

  bool same_shape(const TensorT& other) const { return shape_ == other.shape_; }

  /// Same data, new extents. The element count must match.
  TensorT reshaped(Shape shape) const {
    if (shape.numel() != numel()) {
      throw ShapeError("reshape from " + shape_.str() + " to " + shape.str() +
                       " changes the element count");
    }
    TensorT out;
    out.shape_ = std::move(shape);
    out.data_ = data_;
    return out;
  }

 private:
  std::size_t checked_flat(std::initializer_list<std::int64_t> idx) const {
    if (static_cast<std::int64_t>(idx.size()) != shape_.rank()) {
      throw ShapeError("index rank mismatch for shape " + shape_.str());
    }
    std::int64_t flat = 0;
    std::int64_t axis = 0;
    for (std::int64_t i : idx) {
      if (i < 0 || i >= shape_[axis]) {
        throw ShapeError("index out of bounds for shape " + shape_.str());
      }
      flat = flat * shape_[axis] + i;
      ++axis;
    }
    return static_cast<std::size_t>(flat);
  }

  Shape shape_;
  std::vector<T> data_;
};

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

enum class ElementwiseOp { kAdd, kSub, kMul };

template <typename T>
TensorT<T> elementwise(const TensorT<T>& a, const TensorT<T>& b, ElementwiseOp op) {
  if (!a.same_shape(b)) {
    throw ShapeError("elementwise operands differ: " + a.shape().str() + " vs " +
                     b.shape().str());
  }
  TensorT<T> out(a.shape());
  const T* pa = a.data();
  const T* pb = b.data();
  T* po = out.data();
  const std::int64_t n = a.numel();
  switch (op) {
    case ElementwiseOp::kAdd:
      for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
      break;
    case ElementwiseOp::kSub:
      for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
      break;
    case ElementwiseOp::kMul:
      for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
      break;
  }
  return out;
}

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
  return elementwise(a, b, ElementwiseOp::kAdd);
}
template <typename T>
TensorT<T> sub(const TensorT<T>& a, const TensorT<T>& b) {
  return elementwise(a, b, ElementwiseOp::kSub);
}
template <typename T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
  return elementwise(a, b, ElementwiseOp::kMul);
}

namespace detail {

// c[m,n] += a[m,k] * b[k,n]; c must be pre-initialized by the caller. Each
// output element accumulates over k in ascending order, so results do not
// depend on the worker count.
template <typename T>
void matmul_acc_raw(const T* a, const T* b, T* c, std::int64_t m, std::int64_t k,
                    std::int64_t n) {
  parallel_for(0, m, [&](std::int64_t row_lo, std::int64_t row_hi) {
    for (std::int64_t i = row_lo; i < row_hi; ++i) {
      const T* arow = a + i * k;
      T* crow = c + i * n;
      for (std::int64_t p = 0; p < k; ++p) {
        const T av = arow[p];
        const T* brow = b + p * n;
        for (std::int64_t j = 0; j < n; ++j) {
          crow[j] += av * brow[j];
        }
      }
    }
  });
}

// c[m,n] = a[m,p] * b[n,p]^T.
template <typename T>
void matmul_nt_raw(const T* a, const T* b, T* c, std::int64_t m, std::int64_t p,
                   std::int64_t n) {
  parallel_for(0, m, [&](std::int64_t row_lo, std::int64_t row_hi) {
    for (std::int64_t i = row_lo; i < row_hi; ++i) {
      const T* arow = a + i * p;
      T* crow = c + i * n;
      for (std::int64_t j = 0; j < n; ++j) {
        const T* brow = b + j * p;
        T acc = T(0);
        for (std::int64_t q = 0; q < p; ++q) {
          acc += arow[q] * brow[q];
        }
        crow[j] = acc;
      }
    }
  });
}

// c[k,n] += a[m,k]^T * b[m,n]; c must be zero-initialized. Workers own
// disjoint column bands of a (i.e. rows of c); within a band the sum over m
// runs in ascending order, so results do not depend on the worker count.
template <typename T>
void matmul_tn_raw(const T* a, const T* b, T* c, std::int64_t m, std::int64_t k,
                   std::int64_t n) {
  parallel_for(0, k, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t r = 0; r < m; ++r) {
      const T* arow = a + r * k;
      const T* brow = b + r * n;
      for (std::int64_t i = lo; i < hi; ++i) {
        const T av = arow[i];
        T* crow = c + i * n;
        for (std::int64_t j = 0; j < n; ++j) {
          crow[j] += av * brow[j];
        }
      }
    }
  });
}

}  // namespace detail

/// C[m,n] = A[m,k] * B[k,n]. Each output element accumulates over k in
/// ascending order, so the result is independent of the worker count.
template <typename T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw ShapeError("matmul expects rank-2 operands, got " + a.shape().str() + " and " +
                     b.shape().str());
  }
  if (b.extent(0) != a.extent(1)) {
    throw ShapeError("matmul inner dimensions differ: " + a.shape().str() + " x " +
                     b.shape().str());
  }
  TensorT<T> c(Shape{a.extent(0), b.extent(1)});
  detail::matmul_acc_raw(a.data(), b.data(), c.data(), a.extent(0), a.extent(1), b.extent(1));
  return c;
}

/// C[m,n] = A[m,k] * B[n,k]^T. Used by dense/conv backward passes.
template <typename T>
TensorT<T> matmul_nt(const TensorT<T>& a, const TensorT<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.extent(1) != b.extent(1)) {
    throw ShapeError("matmul_nt shape mismatch: " + a.shape().str() + " x " +
                     b.shape().str() + "^T");
  }
  TensorT<T> c(Shape{a.extent(0), b.extent(0)});
  detail::matmul_nt_raw(a.data(), b.data(), c.data(), a.extent(0), a.extent(1), b.extent(0));
  return c;
}

/// C[k,n] = A[m,k]^T * B[m,n]. Each output element sums over rows of A in
/// ascending order.
template <typename T>
TensorT<T> matmul_tn(const TensorT<T>& a, const TensorT<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.extent(0) != b.extent(0)) {
    throw ShapeError("matmul_tn shape mismatch: " + a.shape().str() + "^T x " +
                     b.shape().str());
  }
  TensorT<T> c(Shape{a.extent(1), b.extent(1)});
  detail::matmul_tn_raw(a.data(), b.data(), c.data(), a.extent(0), a.extent(1), b.extent(1));
  return c;
}

template <typename T>
TensorT<T> tensor_create(Shape shape, T fill) {
  return TensorT<T>::full(std::move(shape), fill);
}

}  // namespace mcn
