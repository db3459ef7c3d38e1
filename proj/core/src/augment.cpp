#include "mcn/augment.hpp"

#include <cmath>

#include "mcn/error.hpp"

namespace mcn {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_image(const Tensor& image, const char* op) {
  if (image.rank() != 3) {
    throw ShapeError(std::string(op) + " expects an [h,w,c] image, got " + image.shape().str());
  }
}

}  // namespace

void validate_augment_config(const AugmentConfig& config) {
  if (!(config.flip_prob >= 0.0 && config.flip_prob <= 1.0)) {
    throw ValueError("flip_prob must lie in [0, 1]");
  }
  if (!(config.max_shift_frac >= 0.0 && config.max_shift_frac < 1.0)) {
    throw ValueError("max_shift_frac must lie in [0, 1)");
  }
  if (!(config.max_rotate_deg >= 0.0)) {
    throw ValueError("max_rotate_deg must be >= 0");
  }
}

Tensor hflip(const Tensor& image) {
  require_image(image, "hflip");
  const std::int64_t h = image.extent(0), w = image.extent(1), c = image.extent(2);
  Tensor out(image.shape());
  const float* pin = image.data();
  float* po = out.data();
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      const float* src = pin + (y * w + (w - 1 - x)) * c;
      float* dst = po + (y * w + x) * c;
      for (std::int64_t i = 0; i < c; ++i) dst[i] = src[i];
    }
  }
  return out;
}

Tensor shift(const Tensor& image, std::int64_t dx, std::int64_t dy, float fill) {
  require_image(image, "shift");
  const std::int64_t h = image.extent(0), w = image.extent(1), c = image.extent(2);
  Tensor out(image.shape(), fill);
  const float* pin = image.data();
  float* po = out.data();
  for (std::int64_t y = 0; y < h; ++y) {
    const std::int64_t sy = y - dy;
    if (sy < 0 || sy >= h) continue;
    for (std::int64_t x = 0; x < w; ++x) {
      const std::int64_t sx = x - dx;
      if (sx < 0 || sx >= w) continue;
      const float* src = pin + (sy * w + sx) * c;
      float* dst = po + (y * w + x) * c;
      for (std::int64_t i = 0; i < c; ++i) dst[i] = src[i];
    }
  }
  return out;
}

Tensor rotate(const Tensor& image, double degrees, Interpolation method, float fill) {
  require_image(image, "rotate");
  const std::int64_t h = image.extent(0), w = image.extent(1), c = image.extent(2);
  if (degrees == 0.0) return image;
  const double theta = degrees * kPi / 180.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double cx = static_cast<double>(w - 1) / 2.0;
  const double cy = static_cast<double>(h - 1) / 2.0;
  Tensor out(image.shape(), fill);
  const float* pin = image.data();
  float* po = out.data();
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      // Inverse map: walk each output pixel back into the source. With x
      // right and y down, positive angles appear counterclockwise on screen.
      const double rx = static_cast<double>(x) - cx;
      const double ry = static_cast<double>(y) - cy;
      const double sx = cx + cos_t * rx - sin_t * ry;
      const double sy = cy + sin_t * rx + cos_t * ry;
      float* dst = po + (y * w + x) * c;
      if (method == Interpolation::kNearest) {
        const std::int64_t ix = std::lround(sx);
        const std::int64_t iy = std::lround(sy);
        if (ix < 0 || ix >= w || iy < 0 || iy >= h) continue;
        const float* src = pin + (iy * w + ix) * c;
        for (std::int64_t i = 0; i < c; ++i) dst[i] = src[i];
      } else {
        const double fx = std::floor(sx);
        const double fy = std::floor(sy);
        const std::int64_t x0 = static_cast<std::int64_t>(fx);
        const std::int64_t y0 = static_cast<std::int64_t>(fy);
        const double ax = sx - fx;
        const double ay = sy - fy;
        for (std::int64_t i = 0; i < c; ++i) {
          auto sample = [&](std::int64_t yy, std::int64_t xx) -> double {
            if (xx < 0 || xx >= w || yy < 0 || yy >= h) return fill;
            return pin[(yy * w + xx) * c + i];
          };
          const double v = (1 - ay) * ((1 - ax) * sample(y0, x0) + ax * sample(y0, x0 + 1)) +
                           ay * ((1 - ax) * sample(y0 + 1, x0) + ax * sample(y0 + 1, x0 + 1));
          dst[i] = static_cast<float>(v);
        }
      }
    }
  }
  return out;
}

Tensor random_augment(const Tensor& image, const AugmentConfig& config, RngStream& rng) {
  require_image(image, "random_augment");
  validate_augment_config(config);
  const std::int64_t h = image.extent(0), w = image.extent(1);
  // Always draw all four values so the stream advances identically no matter
  // which transforms end up as identities.
  const bool do_flip = rng.bernoulli(config.flip_prob);
  const std::int64_t max_dx = static_cast<std::int64_t>(config.max_shift_frac * static_cast<double>(w));
  const std::int64_t max_dy = static_cast<std::int64_t>(config.max_shift_frac * static_cast<double>(h));
  const std::int64_t dx = max_dx > 0 ? rng.uniform_int(-max_dx, max_dx) : (rng.next_u64(), 0);
  const std::int64_t dy = max_dy > 0 ? rng.uniform_int(-max_dy, max_dy) : (rng.next_u64(), 0);
  const double angle = rng.uniform(-config.max_rotate_deg, config.max_rotate_deg);

  Tensor out = do_flip ? hflip(image) : image;
  if (dx != 0 || dy != 0) {
    out = shift(out, dx, dy, config.fill_value);
  }
  if (angle != 0.0) {
    out = rotate(out, angle, config.interpolation, config.fill_value);
  }
  return out;
}

}  // namespace mcn
