#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcn/augment.hpp"
#include "mcn/tensor.hpp"

namespace mcn {

struct Sample {
  Tensor image;  // [h,w,c], values in [0,1]
  std::int64_t label = 0;
  std::string source_path;
};

/// Labeled corpus. Class index = rank of the class directory name in
/// ascending lexicographic order ('a' -> 0 ... 'j' -> 9).
struct Dataset {
  std::vector<Sample> samples;
  std::vector<std::string> class_names;
  std::int64_t class_count = 0;
};

struct DecodeFailure {
  std::string path;
  std::string reason;
};

struct LoadOptions {
  // 0 keeps the native size; otherwise images are resized after normalizing.
  std::int64_t target_h = 0;
  std::int64_t target_w = 0;
  Interpolation method = Interpolation::kNearest;
};

struct LoadResult {
  Dataset dataset;
  std::vector<DecodeFailure> failures;
};

/// Loads `<root>/<class_name>/<image>.ppm`. Undecodable files are collected
/// in the failure list and the load continues; a root without class
/// subdirectories is an error. Sample order is deterministic (sorted paths).
LoadResult load_dataset(const std::string& root_dir, const LoadOptions& options = {});

/// One "<path>\t<reason>" line per failure.
std::string failure_report(const std::vector<DecodeFailure>& failures);

}  // namespace mcn
