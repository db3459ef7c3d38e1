#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mcn/model.hpp"

namespace mcn {

/// Binary weight container, extension .mcw. Layout (all integers unsigned
/// 32-bit little-endian, reals IEEE-754 32-bit little-endian):
///   magic "MCNWGT01" | entry count | entries...
///   entry: name length | name bytes (UTF-8) | rank | extents | payload row-major
/// Entry names are "<layer>/weights" and "<layer>/bias"; unique per file.

struct LoadReport {
  // File entries not applied (unknown name, or shape mismatch in non-strict
  // mode), with a reason per entry.
  std::vector<std::pair<std::string, std::string>> skipped;
  // Model parameters the file did not provide (non-strict mode).
  std::vector<std::string> missing;
  bool complete() const { return skipped.empty() && missing.empty(); }
};

void save_weights(const Model& model, std::ostream& out);
void save_weights(const Model& model, const std::string& path);

/// strict=true demands an exact name/shape match in both directions; any
/// difference throws. strict=false applies every entry whose name and shape
/// match a model parameter, leaving the rest untouched and reported — this is
/// how a differently sized classification head is re-initialized.
LoadReport load_weights(Model& model, std::istream& in, bool strict);
LoadReport load_weights(Model& model, const std::string& path, bool strict);

/// Names and shapes from a weight file without touching any model.
std::vector<std::pair<std::string, Shape>> read_weight_shapes(const std::string& path);

}  // namespace mcn
