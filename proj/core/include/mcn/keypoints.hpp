#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcn/augment.hpp"
#include "mcn/tensor.hpp"

namespace mcn {

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 1.0;
};

/// Hand-landmark coordinates from an external detector, in pixel units of the
/// image they were computed on.
struct KeypointSet {
  std::vector<Keypoint> points;
  std::int64_t image_width = 0;
  std::int64_t image_height = 0;
};

/// Parses {"image_width": W, "image_height": H, "points": [{"x":..,"y":..,
/// "confidence"?:..}, ...]}. Missing fields, an empty points array, or
/// malformed JSON raise a format error. Point order is preserved.
KeypointSet read_keypoints_json(const std::string& text);
KeypointSet read_keypoints_file(const std::string& path);

/// Continuous crop window in pixel coordinates, half-open once rasterized.
struct CropBox {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

/// Axis-aligned bounding box of the points, expanded on every edge by
/// margin_frac of its larger side, then squared to the larger side with the
/// center preserved. Not yet clamped to any image.
CropBox compute_crop_box(const KeypointSet& kps, double margin_frac);

/// compute_crop_box, clamp to the image, crop (floor/ceil rasterization),
/// and resize to (out_h, out_w). A box that clamps to zero area is an error.
Tensor crop_from_keypoints(const Tensor& image, const KeypointSet& kps, double margin_frac,
                           std::int64_t out_h, std::int64_t out_w,
                           Interpolation method = Interpolation::kNearest);

}  // namespace mcn
