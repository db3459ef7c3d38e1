#pragma once

#include <cstdint>

#include "mcn/rng.hpp"
#include "mcn/tensor.hpp"

namespace mcn {

enum class Interpolation { kNearest, kBilinear };

/// Random-augmentation ranges. Shifts are integer pixels drawn uniformly from
/// +-floor(max_shift_frac * extent); rotation angles come from
/// +-max_rotate_deg (degrees, positive = counterclockwise).
struct AugmentConfig {
  double flip_prob = 0.5;
  double max_shift_frac = 0.1;
  double max_rotate_deg = 15.0;
  float fill_value = 0.0f;
  Interpolation interpolation = Interpolation::kNearest;
};

void validate_augment_config(const AugmentConfig& config);

/// Mirrors columns: out[y][x] = in[y][w-1-x].
Tensor hflip(const Tensor& image);

/// Translates content by (dx, dy) pixels (positive = right/down); vacated
/// pixels take `fill`, shifted-out content is discarded.
Tensor shift(const Tensor& image, std::int64_t dx, std::int64_t dy, float fill);

/// Rotates about the image center; output extents equal input extents and
/// samples falling outside the source take `fill`.
Tensor rotate(const Tensor& image, double degrees, Interpolation method, float fill);

/// Draws (flip?, dx, dy, angle) from `rng` in that fixed order, then applies
/// flip -> shift -> rotate. Output is fully determined by
/// (image, config, stream state).
Tensor random_augment(const Tensor& image, const AugmentConfig& config, RngStream& rng);

}  // namespace mcn
