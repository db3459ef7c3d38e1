#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "mcn/error.hpp"
#include "mcn/tensor.hpp"

namespace mcn {

/// Probabilities below this are clamped before the log so no input can
/// produce an infinite loss.
inline constexpr double kProbClamp = 1e-12;

template <typename T>
struct LossValueT {
  double value = 0.0;              // mean negative log-likelihood, in nats
  TensorT<T> logit_grad;           // d(value)/d(logits), shape [batch, classes]
};

using LossValue = LossValueT<float>;

template <typename T>
TensorT<T> one_hot(std::span<const std::int64_t> labels, std::int64_t class_count) {
  if (class_count < 1) {
    throw ValueError("one_hot needs a positive class count");
  }
  TensorT<T> out(Shape{static_cast<std::int64_t>(labels.size()), class_count});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) {
      throw ValueError("label " + std::to_string(labels[i]) + " outside [0, " +
                       std::to_string(class_count) + ")");
    }
    out[static_cast<std::int64_t>(i) * class_count + labels[i]] = T(1);
  }
  return out;
}

/// Mean categorical cross-entropy over the batch, plus the gradient with
/// respect to the pre-softmax logits via the fused softmax+CE simplification
/// (probs - one_hot) / batch. `probs` must already be softmax output.
template <typename T>
LossValueT<T> categorical_cross_entropy(const TensorT<T>& probs, const TensorT<T>& targets) {
  if (probs.rank() != 2 || !probs.same_shape(targets)) {
    throw ShapeError("cross entropy expects matching [batch, classes] tensors, got " +
                     probs.shape().str() + " and " + targets.shape().str());
  }
  const std::int64_t b = probs.extent(0);
  const std::int64_t k = probs.extent(1);
  if (b < 1) {
    throw ValueError("cross entropy needs a non-empty batch");
  }
  const T* pp = probs.data();
  const T* pt = targets.data();
  double total = 0.0;
  for (std::int64_t r = 0; r < b; ++r) {
    double row_sum = 0.0;
    std::int64_t ones = 0;
    std::int64_t true_class = -1;
    for (std::int64_t j = 0; j < k; ++j) {
      const T t = pt[r * k + j];
      if (t == T(1)) {
        ++ones;
        true_class = j;
      } else if (t != T(0)) {
        throw ValueError("target row " + std::to_string(r) + " is not one-hot");
      }
      row_sum += static_cast<double>(pp[r * k + j]);
    }
    if (ones != 1) {
      throw ValueError("target row " + std::to_string(r) + " is not one-hot");
    }
    if (std::abs(row_sum - 1.0) > 1e-5) {
      throw ValueError("probability row " + std::to_string(r) + " sums to " +
                       std::to_string(row_sum) + ", expected 1");
    }
    const double p = std::min(std::max(static_cast<double>(pp[r * k + true_class]), kProbClamp),
                              1.0);
    total -= std::log(p);
  }
  LossValueT<T> out;
  out.value = total / static_cast<double>(b);
  out.logit_grad = TensorT<T>(probs.shape());
  T* pg = out.logit_grad.data();
  const T inv_b = T(1) / static_cast<T>(b);
  for (std::int64_t i = 0; i < b * k; ++i) {
    pg[i] = (pp[i] - pt[i]) * inv_b;
  }
  return out;
}

/// Literal two-term binary cross-entropy, -(1/N) * sum(y*log(p) + (1-y)*log(1-p)),
/// with predictions clamped to [1e-12, 1-1e-12]. Provided as a standalone
/// metric; training uses the categorical form.
template <typename T>
double binary_cross_entropy(const TensorT<T>& pred, const TensorT<T>& target) {
  if (pred.rank() != 1 || !pred.same_shape(target)) {
    throw ShapeError("binary cross entropy expects matching rank-1 tensors, got " +
                     pred.shape().str() + " and " + target.shape().str());
  }
  const std::int64_t n = pred.numel();
  if (n < 1) {
    throw ValueError("binary cross entropy needs at least one element");
  }
  const T* pp = pred.data();
  const T* pt = target.data();
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const T y = pt[i];
    if (y != T(0) && y != T(1)) {
      throw ValueError("binary cross entropy targets must be 0 or 1");
    }
    const double p =
        std::min(std::max(static_cast<double>(pp[i]), kProbClamp), 1.0 - kProbClamp);
    total += static_cast<double>(y) * std::log(p) +
             (1.0 - static_cast<double>(y)) * std::log(1.0 - p);
  }
  return -total / static_cast<double>(n);
}

}  // namespace mcn
