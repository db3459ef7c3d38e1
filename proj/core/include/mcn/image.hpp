#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mcn/augment.hpp"
#include "mcn/tensor.hpp"

namespace mcn {

/// Decodes binary PPM ("P6", maxval 255) into [h,w,3] raw 0..255 values.
/// Header comments are not supported; the header is magic, width, height,
/// maxval separated by whitespace, then a single whitespace byte before the
/// payload.
Tensor decode_ppm(std::span<const unsigned char> bytes);

/// Encodes an [h,w,3] image with values in [0,1] as binary PPM; values are
/// clamped and rounded to bytes.
std::vector<unsigned char> encode_ppm(const Tensor& image);

Tensor read_ppm_file(const std::string& path);
void write_ppm_file(const std::string& path, const Tensor& image);

/// value / 255 elementwise; input values must lie in [0, 255].
Tensor normalize(const Tensor& raw);

/// Resamples to (target_h, target_w). Nearest maps dst -> floor(dst * scale);
/// bilinear samples at (dst + 0.5) * scale - 0.5 with edge clamping.
Tensor resize(const Tensor& image, std::int64_t target_h, std::int64_t target_w,
              Interpolation method);

}  // namespace mcn
