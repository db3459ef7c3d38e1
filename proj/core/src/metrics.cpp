#include "mcn/metrics.hpp"

#include <string>

#include "mcn/error.hpp"

namespace mcn {

std::vector<ConfusionCounts> confusion_counts(std::span<const std::int64_t> pred_labels,
                                              std::span<const std::int64_t> true_labels,
                                              std::int64_t class_count) {
  if (pred_labels.size() != true_labels.size()) {
    throw ValueError("confusion_counts: label lists differ in length");
  }
  if (class_count < 1) {
    throw ValueError("confusion_counts: class count must be positive");
  }
  for (std::size_t i = 0; i < pred_labels.size(); ++i) {
    if (pred_labels[i] < 0 || pred_labels[i] >= class_count || true_labels[i] < 0 ||
        true_labels[i] >= class_count) {
      throw ValueError("confusion_counts: label outside [0, " + std::to_string(class_count) +
                       ") at position " + std::to_string(i));
    }
  }
  std::vector<ConfusionCounts> out(static_cast<std::size_t>(class_count));
  for (std::size_t i = 0; i < pred_labels.size(); ++i) {
    const std::int64_t p = pred_labels[i];
    const std::int64_t t = true_labels[i];
    for (std::int64_t c = 0; c < class_count; ++c) {
      ConfusionCounts& cc = out[static_cast<std::size_t>(c)];
      if (t == c) {
        (p == c ? cc.tp : cc.fn) += 1;
      } else {
        (p == c ? cc.fp : cc.tn) += 1;
      }
    }
  }
  return out;
}

double accuracy(std::span<const std::int64_t> pred_labels,
                std::span<const std::int64_t> true_labels) {
  if (pred_labels.empty()) {
    throw ValueError("accuracy: empty input");
  }
  if (pred_labels.size() != true_labels.size()) {
    throw ValueError("accuracy: label lists differ in length");
  }
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < pred_labels.size(); ++i) {
    if (pred_labels[i] == true_labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pred_labels.size());
}

std::vector<std::int64_t> argmax_rows(const Tensor& probs) {
  if (probs.rank() != 2) {
    throw ShapeError("argmax_rows expects [batch, classes], got " + probs.shape().str());
  }
  const std::int64_t b = probs.extent(0);
  const std::int64_t k = probs.extent(1);
  std::vector<std::int64_t> out(static_cast<std::size_t>(b));
  const float* p = probs.data();
  for (std::int64_t r = 0; r < b; ++r) {
    const float* row = p + r * k;
    std::int64_t best = 0;
    for (std::int64_t j = 1; j < k; ++j) {
      if (row[j] > row[best]) best = j;
    }
    out[static_cast<std::size_t>(r)] = best;
  }
  return out;
}

}  // namespace mcn
