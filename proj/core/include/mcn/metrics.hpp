#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcn/tensor.hpp"

namespace mcn {

/// One-vs-rest counts for a single class.
struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

/// Per-class one-vs-rest confusion counts. Labels must lie in [0, class_count).
std::vector<ConfusionCounts> confusion_counts(std::span<const std::int64_t> pred_labels,
                                              std::span<const std::int64_t> true_labels,
                                              std::int64_t class_count);

/// Fraction of predictions matching the truth. Errors on empty input.
double accuracy(std::span<const std::int64_t> pred_labels,
                std::span<const std::int64_t> true_labels);

/// Row-wise argmax of a [batch, classes] tensor; ties go to the lowest index.
std::vector<std::int64_t> argmax_rows(const Tensor& probs);

}  // namespace mcn
