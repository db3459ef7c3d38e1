#include "mcn/dataset.hpp"

#include <algorithm>
#include <filesystem>

#include "mcn/error.hpp"
#include "mcn/image.hpp"

namespace fs = std::filesystem;

namespace mcn {

LoadResult load_dataset(const std::string& root_dir, const LoadOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(root_dir, ec)) {
    throw DataError("dataset root '" + root_dir + "' is not a directory");
  }
  std::vector<std::string> class_names;
  for (const auto& entry : fs::directory_iterator(root_dir)) {
    if (entry.is_directory()) {
      class_names.push_back(entry.path().filename().string());
    }
  }
  if (class_names.empty()) {
    throw DataError("dataset root '" + root_dir + "' has no class directories");
  }
  std::sort(class_names.begin(), class_names.end());

  LoadResult result;
  result.dataset.class_names = class_names;
  result.dataset.class_count = static_cast<std::int64_t>(class_names.size());
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(fs::path(root_dir) / class_names[c])) {
      if (entry.is_regular_file()) {
        files.push_back(entry.path().string());
      }
    }
    std::sort(files.begin(), files.end());
    for (const std::string& path : files) {
      try {
        Tensor image = normalize(read_ppm_file(path));
        if (options.target_h > 0 && options.target_w > 0) {
          image = resize(image, options.target_h, options.target_w, options.method);
        }
        Sample sample;
        sample.image = std::move(image);
        sample.label = static_cast<std::int64_t>(c);
        sample.source_path = path;
        result.dataset.samples.push_back(std::move(sample));
      } catch (const Error& e) {
        result.failures.push_back({path, e.what()});
      }
    }
  }
  return result;
}

std::string failure_report(const std::vector<DecodeFailure>& failures) {
  std::string out;
  for (const auto& f : failures) {
    out += f.path;
    out += '\t';
    out += f.reason;
    out += '\n';
  }
  return out;
}

}  // namespace mcn
