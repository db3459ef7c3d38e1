#include "mcn/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "mcn/error.hpp"

namespace mcn {

namespace {

bool is_ppm_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Parses one whitespace-delimited unsigned decimal token.
std::int64_t parse_header_int(std::span<const unsigned char> bytes, std::size_t& pos,
                              const char* what) {
  while (pos < bytes.size() && is_ppm_space(bytes[pos])) ++pos;
  if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
    throw FormatError(std::string("ppm: missing ") + what);
  }
  std::int64_t value = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    value = value * 10 + (bytes[pos] - '0');
    if (value > 1'000'000'000) throw FormatError(std::string("ppm: absurd ") + what);
    ++pos;
  }
  return value;
}

}  // namespace

Tensor decode_ppm(std::span<const unsigned char> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw FormatError("ppm: bad magic, expected P6");
  }
  std::size_t pos = 2;
  const std::int64_t w = parse_header_int(bytes, pos, "width");
  const std::int64_t h = parse_header_int(bytes, pos, "height");
  const std::int64_t maxval = parse_header_int(bytes, pos, "maxval");
  if (w < 1 || h < 1) throw FormatError("ppm: non-positive dimensions");
  if (maxval != 255) throw FormatError("ppm: maxval must be 255");
  if (pos >= bytes.size() || !is_ppm_space(bytes[pos])) {
    throw FormatError("ppm: missing whitespace before payload");
  }
  ++pos;  // exactly one whitespace byte separates header and payload
  const std::int64_t need = w * h * 3;
  if (static_cast<std::int64_t>(bytes.size() - pos) < need) {
    throw FormatError("ppm: truncated payload");
  }
  Tensor out(Shape{h, w, 3});
  float* po = out.data();
  for (std::int64_t i = 0; i < need; ++i) {
    po[i] = static_cast<float>(bytes[pos + static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<unsigned char> encode_ppm(const Tensor& image) {
  if (image.rank() != 3 || image.extent(2) != 3) {
    throw ShapeError("encode_ppm expects [h,w,3], got " + image.shape().str());
  }
  const std::int64_t h = image.extent(0), w = image.extent(1);
  std::string header = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(out.size() + static_cast<std::size_t>(h * w * 3));
  const float* p = image.data();
  for (std::int64_t i = 0; i < h * w * 3; ++i) {
    const float v = std::clamp(p[i], 0.0f, 1.0f);
    out.push_back(static_cast<unsigned char>(std::lround(v * 255.0f)));
  }
  return out;
}

Tensor read_ppm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return decode_ppm(bytes);
}

void write_ppm_file(const std::string& path, const Tensor& image) {
  const std::vector<unsigned char> bytes = encode_ppm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing '" + path + "'");
}

Tensor normalize(const Tensor& raw) {
  Tensor out(raw.shape());
  const float* pin = raw.data();
  float* po = out.data();
  for (std::int64_t i = 0; i < raw.numel(); ++i) {
    if (pin[i] < 0.0f || pin[i] > 255.0f) {
      throw ValueError("normalize expects values in [0, 255]");
    }
    po[i] = pin[i] / 255.0f;
  }
  return out;
}

Tensor resize(const Tensor& image, std::int64_t target_h, std::int64_t target_w,
              Interpolation method) {
  if (image.rank() != 3) {
    throw ShapeError("resize expects an [h,w,c] image, got " + image.shape().str());
  }
  if (target_h < 1 || target_w < 1) {
    throw ValueError("resize targets must be positive");
  }
  const std::int64_t h = image.extent(0), w = image.extent(1), c = image.extent(2);
  if (h == target_h && w == target_w) return image;
  Tensor out(Shape{target_h, target_w, c});
  const float* pin = image.data();
  float* po = out.data();
  const double scale_y = static_cast<double>(h) / static_cast<double>(target_h);
  const double scale_x = static_cast<double>(w) / static_cast<double>(target_w);
  for (std::int64_t y = 0; y < target_h; ++y) {
    for (std::int64_t x = 0; x < target_w; ++x) {
      float* dst = po + (y * target_w + x) * c;
      if (method == Interpolation::kNearest) {
        const std::int64_t sy =
            std::min<std::int64_t>(static_cast<std::int64_t>(y * scale_y), h - 1);
        const std::int64_t sx =
            std::min<std::int64_t>(static_cast<std::int64_t>(x * scale_x), w - 1);
        const float* src = pin + (sy * w + sx) * c;
        for (std::int64_t i = 0; i < c; ++i) dst[i] = src[i];
      } else {
        const double sy = std::clamp((y + 0.5) * scale_y - 0.5, 0.0, static_cast<double>(h - 1));
        const double sx = std::clamp((x + 0.5) * scale_x - 0.5, 0.0, static_cast<double>(w - 1));
        const std::int64_t y0 = static_cast<std::int64_t>(sy);
        const std::int64_t x0 = static_cast<std::int64_t>(sx);
        const std::int64_t y1 = std::min(y0 + 1, h - 1);
        const std::int64_t x1 = std::min(x0 + 1, w - 1);
        const double ay = sy - static_cast<double>(y0);
        const double ax = sx - static_cast<double>(x0);
        for (std::int64_t i = 0; i < c; ++i) {
          const double v00 = pin[(y0 * w + x0) * c + i];
          const double v01 = pin[(y0 * w + x1) * c + i];
          const double v10 = pin[(y1 * w + x0) * c + i];
          const double v11 = pin[(y1 * w + x1) * c + i];
          dst[i] = static_cast<float>((1 - ay) * ((1 - ax) * v00 + ax * v01) +
                                      ay * ((1 - ax) * v10 + ax * v11));
        }
      }
    }
  }
  return out;
}

}  // namespace mcn
