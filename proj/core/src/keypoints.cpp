#include "mcn/keypoints.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mcn/error.hpp"
#include "mcn/image.hpp"

namespace mcn {

KeypointSet read_keypoints_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("keypoints: malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("image_width") || !doc.contains("image_height") ||
      !doc.contains("points")) {
    throw FormatError("keypoints: need image_width, image_height, and points");
  }
  KeypointSet out;
  try {
    out.image_width = doc["image_width"].get<std::int64_t>();
    out.image_height = doc["image_height"].get<std::int64_t>();
    if (!doc["points"].is_array() || doc["points"].empty()) {
      throw FormatError("keypoints: points must be a non-empty array");
    }
    for (const auto& p : doc["points"]) {
      Keypoint kp;
      kp.x = p.at("x").get<double>();
      kp.y = p.at("y").get<double>();
      if (p.contains("confidence")) kp.confidence = p["confidence"].get<double>();
      if (!std::isfinite(kp.x) || !std::isfinite(kp.y)) {
        throw FormatError("keypoints: coordinates must be finite");
      }
      out.points.push_back(kp);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("keypoints: ") + e.what());
  }
  if (out.image_width < 1 || out.image_height < 1) {
    throw FormatError("keypoints: image dimensions must be positive");
  }
  return out;
}

KeypointSet read_keypoints_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_keypoints_json(buf.str());
}

CropBox compute_crop_box(const KeypointSet& kps, double margin_frac) {
  if (kps.points.empty()) {
    throw ValueError("compute_crop_box needs at least one keypoint");
  }
  if (margin_frac < 0.0) {
    throw ValueError("margin_frac must be >= 0");
  }
  double min_x = kps.points[0].x, max_x = kps.points[0].x;
  double min_y = kps.points[0].y, max_y = kps.points[0].y;
  for (const Keypoint& p : kps.points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double side = std::max(max_x - min_x, max_y - min_y);
  const double margin = margin_frac * side;
  CropBox box{min_x - margin, min_y - margin, max_x + margin, max_y + margin};
  // Square to the larger side, keeping the center.
  const double target = std::max(box.width(), box.height());
  const double cx = (box.x0 + box.x1) / 2.0;
  const double cy = (box.y0 + box.y1) / 2.0;
  box.x0 = cx - target / 2.0;
  box.x1 = cx + target / 2.0;
  box.y0 = cy - target / 2.0;
  box.y1 = cy + target / 2.0;
  return box;
}

Tensor crop_from_keypoints(const Tensor& image, const KeypointSet& kps, double margin_frac,
                           std::int64_t out_h, std::int64_t out_w, Interpolation method) {
  if (image.rank() != 3) {
    throw ShapeError("crop_from_keypoints expects an [h,w,c] image, got " +
                     image.shape().str());
  }
  const std::int64_t h = image.extent(0), w = image.extent(1), c = image.extent(2);
  CropBox box = compute_crop_box(kps, margin_frac);
  box.x0 = std::clamp(box.x0, 0.0, static_cast<double>(w));
  box.x1 = std::clamp(box.x1, 0.0, static_cast<double>(w));
  box.y0 = std::clamp(box.y0, 0.0, static_cast<double>(h));
  box.y1 = std::clamp(box.y1, 0.0, static_cast<double>(h));
  const std::int64_t x0 = static_cast<std::int64_t>(std::floor(box.x0));
  const std::int64_t x1 = std::min<std::int64_t>(static_cast<std::int64_t>(std::ceil(box.x1)), w);
  const std::int64_t y0 = static_cast<std::int64_t>(std::floor(box.y0));
  const std::int64_t y1 = std::min<std::int64_t>(static_cast<std::int64_t>(std::ceil(box.y1)), h);
  if (x1 <= x0 || y1 <= y0) {
    throw DataError("keypoint crop box has zero area after clamping");
  }
  Tensor crop(Shape{y1 - y0, x1 - x0, c});
  const float* pin = image.data();
  float* po = crop.data();
  for (std::int64_t y = y0; y < y1; ++y) {
    const float* src = pin + (y * w + x0) * c;
    float* dst = po + (y - y0) * (x1 - x0) * c;
    std::copy(src, src + (x1 - x0) * c, dst);
  }
  return resize(crop, out_h, out_w, method);
}

}  // namespace mcn
