#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcn/error.hpp"
#include "mcn/parallel.hpp"
#include "mcn/rng.hpp"
#include "mcn/tensor.hpp"

namespace mcn {

enum class Padding { kSame, kValid };

/// Activation fused onto a convolution or dense layer, Keras-style. The model
/// applies it right after the layer's linear map.
enum class Activation { kNone, kRelu, kSoftmax };

// ---------------------------------------------------------------------------
// Layer parameter structs.
// ---------------------------------------------------------------------------

/// 2-D convolution. Weights are [kernel_h, kernel_w, in_channels, out_channels].
template <typename T>
struct Conv2D {
  TensorT<T> weights;
  TensorT<T> bias;
  std::int64_t stride = 1;
  Padding padding = Padding::kSame;
  Activation activation = Activation::kNone;
  std::string name;
};

struct MaxPool2D {
  std::int64_t pool_h = 2;
  std::int64_t pool_w = 2;
  std::int64_t stride = 2;
  std::string name;
};

/// Fully connected layer. Weights are [in_features, out_features], applied as
/// out = input * W + bias.
template <typename T>
struct Dense {
  TensorT<T> weights;
  TensorT<T> bias;
  Activation activation = Activation::kNone;
  std::string name;
};

struct Dropout {
  double rate = 0.5;
  std::string name;
};

struct Flatten {
  std::string name;
};

/// Placeholder input layer; forwards its input unchanged and owns no
/// parameters. Exists so freeze boundaries can name the start of the network.
struct InputLayer {
  std::string name;
};

// ---------------------------------------------------------------------------
// Backward contexts. A context is only valid for the forward call that
// produced it and must not be shared between concurrent backward calls.
// ---------------------------------------------------------------------------

template <typename T>
struct Conv2DContext {
  TensorT<T> input;
};

struct MaxPool2DContext {
  Shape input_shape;
  std::vector<std::int64_t> argmax;  // flat input index per output element
};

template <typename T>
struct ReluContext {
  TensorT<T> input;
};

template <typename T>
struct DenseContext {
  TensorT<T> input;
};

template <typename T>
struct DropoutContext {
  bool identity = true;
  TensorT<T> mask;  // 0 for dropped elements, 1/(1-rate) for kept ones
};

template <typename T>
struct SoftmaxContext {
  TensorT<T> probs;
};

struct FlattenContext {
  Shape input_shape;
};

// ---------------------------------------------------------------------------
// Convolution geometry ("same" pads floor/ceil with the extra row/column on
// the bottom/right; "valid" requires the kernel to fit).
// ---------------------------------------------------------------------------

struct Conv2DGeometry {
  std::int64_t batch, in_h, in_w, in_ch;
  std::int64_t kernel_h, kernel_w, out_ch;
  std::int64_t stride;
  std::int64_t pad_top, pad_left;
  std::int64_t out_h, out_w;
  std::int64_t rows() const { return batch * out_h * out_w; }
  std::int64_t patch_len() const { return kernel_h * kernel_w * in_ch; }
};

template <typename T>
Conv2DGeometry conv2d_geometry(const Shape& input, const Conv2D<T>& layer) {
  if (input.rank() != 4) {
    throw ShapeError("conv2d expects input [batch,h,w,channels], got " + input.str());
  }
  if (layer.weights.rank() != 4) {
    throw ShapeError("conv2d weights must be [kh,kw,in,out], got " + layer.weights.shape().str());
  }
  if (layer.stride < 1) {
    throw ShapeError("conv2d stride must be >= 1");
  }
  Conv2DGeometry g;
  g.batch = input[0];
  g.in_h = input[1];
  g.in_w = input[2];
  g.in_ch = input[3];
  g.kernel_h = layer.weights.extent(0);
  g.kernel_w = layer.weights.extent(1);
  g.out_ch = layer.weights.extent(3);
  g.stride = layer.stride;
  if (layer.weights.extent(2) != g.in_ch) {
    throw ShapeError("conv2d channel mismatch: input has " + std::to_string(g.in_ch) +
                     " channels, weights expect " + std::to_string(layer.weights.extent(2)));
  }
  if (layer.bias.numel() != g.out_ch) {
    throw ShapeError("conv2d bias length must equal out_channels");
  }
  if (layer.padding == Padding::kSame) {
    g.out_h = (g.in_h + g.stride - 1) / g.stride;
    g.out_w = (g.in_w + g.stride - 1) / g.stride;
    const std::int64_t pad_h = std::max<std::int64_t>((g.out_h - 1) * g.stride + g.kernel_h - g.in_h, 0);
    const std::int64_t pad_w = std::max<std::int64_t>((g.out_w - 1) * g.stride + g.kernel_w - g.in_w, 0);
    g.pad_top = pad_h / 2;
    g.pad_left = pad_w / 2;
  } else {
    if (g.in_h < g.kernel_h || g.in_w < g.kernel_w) {
      throw ShapeError("conv2d valid padding needs input at least as large as the kernel");
    }
    g.out_h = (g.in_h - g.kernel_h) / g.stride + 1;
    g.out_w = (g.in_w - g.kernel_w) / g.stride + 1;
    g.pad_top = 0;
    g.pad_left = 0;
  }
  return g;
}

// ---------------------------------------------------------------------------
// im2col patch gather/scatter.
// ---------------------------------------------------------------------------

/// Gathers the input windows into a [rows, kh*kw*in_ch] matrix whose column
/// order matches the row-major weight layout. Out-of-bounds taps read 0.
template <typename T>
TensorT<T> gather_patches(const TensorT<T>& input, const Conv2DGeometry& g) {
  TensorT<T> patches(Shape{g.rows(), g.patch_len()});
  const T* pin = input.data();
  T* pp = patches.data();
  const std::int64_t k = g.patch_len();
  parallel_for(0, g.rows(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t r = lo; r < hi; ++r) {
      const std::int64_t b = r / (g.out_h * g.out_w);
      const std::int64_t rem = r % (g.out_h * g.out_w);
      const std::int64_t oy = rem / g.out_w;
      const std::int64_t ox = rem % g.out_w;
      T* dst = pp + r * k;
      for (std::int64_t dy = 0; dy < g.kernel_h; ++dy) {
        const std::int64_t sy = oy * g.stride + dy - g.pad_top;
        for (std::int64_t dx = 0; dx < g.kernel_w; ++dx) {
          const std::int64_t sx = ox * g.stride + dx - g.pad_left;
          if (sy >= 0 && sy < g.in_h && sx >= 0 && sx < g.in_w) {
            const T* src = pin + ((b * g.in_h + sy) * g.in_w + sx) * g.in_ch;
            std::copy(src, src + g.in_ch, dst);
          }
          dst += g.in_ch;  // already zero-filled for padded taps
        }
      }
    }
  });
  return patches;
}

/// Adds patch-space gradients back into input space. Parallel over the batch;
/// overlapping windows within one sample are accumulated serially.
template <typename T>
void scatter_patches_add(const TensorT<T>& dpatches, const Conv2DGeometry& g,
                         TensorT<T>& dinput) {
  const T* dp = dpatches.data();
  T* din = dinput.data();
  const std::int64_t k = g.patch_len();
  parallel_for(0, g.batch, [&](std::int64_t blo, std::int64_t bhi) {
    for (std::int64_t b = blo; b < bhi; ++b) {
      for (std::int64_t oy = 0; oy < g.out_h; ++oy) {
        for (std::int64_t ox = 0; ox < g.out_w; ++ox) {
          const std::int64_t r = (b * g.out_h + oy) * g.out_w + ox;
          const T* src = dp + r * k;
          for (std::int64_t dy = 0; dy < g.kernel_h; ++dy) {
            const std::int64_t sy = oy * g.stride + dy - g.pad_top;
            for (std::int64_t dx = 0; dx < g.kernel_w; ++dx) {
              const std::int64_t sx = ox * g.stride + dx - g.pad_left;
              if (sy >= 0 && sy < g.in_h && sx >= 0 && sx < g.in_w) {
                T* dst = din + ((b * g.in_h + sy) * g.in_w + sx) * g.in_ch;
                for (std::int64_t i = 0; i < g.in_ch; ++i) {
                  dst[i] += src[i];
                }
              }
              src += g.in_ch;
            }
          }
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Convolution.
// ---------------------------------------------------------------------------

/// Patch-gather + matrix-multiply convolution; the production path.
/// out[b,y,x,o] = bias[o] + sum_{dy,dx,i} in[b, y*s+dy-p, x*s+dx-p, i] * W[dy,dx,i,o]
template <typename T>
std::pair<TensorT<T>, Conv2DContext<T>> conv2d_forward(TensorT<T> input,
                                                       const Conv2D<T>& layer) {
  const Conv2DGeometry g = conv2d_geometry(input.shape(), layer);
  const TensorT<T> patches = gather_patches(input, g);
  TensorT<T> out(Shape{g.batch, g.out_h, g.out_w, g.out_ch});
  const T* pp = patches.data();
  const T* pw = layer.weights.data();
  const T* pb = layer.bias.data();
  T* po = out.data();
  const std::int64_t rows = g.rows();
  const std::int64_t k = g.patch_len();
  const std::int64_t n = g.out_ch;
  parallel_for(0, rows, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t r = lo; r < hi; ++r) {
      T* orow = po + r * n;
      std::copy(pb, pb + n, orow);
      const T* prow = pp + r * k;
      for (std::int64_t p = 0; p < k; ++p) {
        const T pv = prow[p];
        const T* wrow = pw + p * n;
        for (std::int64_t j = 0; j < n; ++j) {
          orow[j] += pv * wrow[j];
        }
      }
    }
  });
  return {std::move(out), Conv2DContext<T>{std::move(input)}};
}

/// Direct sliding-window convolution. Slow; serves as the correctness anchor
/// for the patch-gather path.
template <typename T>
TensorT<T> conv2d_forward_direct(const TensorT<T>& input, const Conv2D<T>& layer) {
  const Conv2DGeometry g = conv2d_geometry(input.shape(), layer);
  TensorT<T> out(Shape{g.batch, g.out_h, g.out_w, g.out_ch});
  const T* pin = input.data();
  const T* pw = layer.weights.data();
  T* po = out.data();
  for (std::int64_t b = 0; b < g.batch; ++b) {
    for (std::int64_t oy = 0; oy < g.out_h; ++oy) {
      for (std::int64_t ox = 0; ox < g.out_w; ++ox) {
        for (std::int64_t o = 0; o < g.out_ch; ++o) {
          T acc = layer.bias[o];
          for (std::int64_t dy = 0; dy < g.kernel_h; ++dy) {
            const std::int64_t sy = oy * g.stride + dy - g.pad_top;
            if (sy < 0 || sy >= g.in_h) continue;
            for (std::int64_t dx = 0; dx < g.kernel_w; ++dx) {
              const std::int64_t sx = ox * g.stride + dx - g.pad_left;
              if (sx < 0 || sx >= g.in_w) continue;
              for (std::int64_t i = 0; i < g.in_ch; ++i) {
                acc += pin[((b * g.in_h + sy) * g.in_w + sx) * g.in_ch + i] *
                       pw[((dy * g.kernel_w + dx) * g.in_ch + i) * g.out_ch + o];
              }
            }
          }
          po[((b * g.out_h + oy) * g.out_w + ox) * g.out_ch + o] = acc;
        }
      }
    }
  }
  return out;
}

template <typename T>
struct Conv2DGrads {
  TensorT<T> input;
  TensorT<T> weights;
  TensorT<T> bias;
};

template <typename T>
Conv2DGrads<T> conv2d_backward(const TensorT<T>& upstream, const Conv2D<T>& layer,
                               const Conv2DContext<T>& ctx, bool want_input_grad = true,
                               bool want_param_grads = true) {
  const Conv2DGeometry g = conv2d_geometry(ctx.input.shape(), layer);
  const Shape expected{g.batch, g.out_h, g.out_w, g.out_ch};
  if (upstream.shape() != expected) {
    throw ShapeError("conv2d upstream gradient must be " + expected.str() + ", got " +
                     upstream.shape().str());
  }
  const std::int64_t rows = g.rows();
  const std::int64_t k = g.patch_len();
  const std::int64_t co = g.out_ch;
  const T* dy = upstream.data();
  Conv2DGrads<T> grads;
  if (want_param_grads) {
    const TensorT<T> patches = gather_patches(ctx.input, g);
    grads.weights = TensorT<T>::zeros(layer.weights.shape());
    detail::matmul_tn_raw(patches.data(), dy, grads.weights.data(), rows, k, co);
    grads.bias = TensorT<T>::zeros(layer.bias.shape());
    T* db = grads.bias.data();
    for (std::int64_t r = 0; r < rows; ++r) {
      const T* dyrow = dy + r * co;
      for (std::int64_t o = 0; o < co; ++o) {
        db[o] += dyrow[o];
      }
    }
  }
  if (want_input_grad) {
    TensorT<T> dpatches(Shape{rows, k});
    detail::matmul_nt_raw(dy, layer.weights.data(), dpatches.data(), rows, co, k);
    grads.input = TensorT<T>::zeros(ctx.input.shape());
    scatter_patches_add(dpatches, g, grads.input);
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Max pooling.
// ---------------------------------------------------------------------------

template <typename T>
std::pair<TensorT<T>, MaxPool2DContext> maxpool2d_forward(const TensorT<T>& input,
                                                          const MaxPool2D& layer) {
  if (input.rank() != 4) {
    throw ShapeError("maxpool2d expects input [batch,h,w,channels], got " + input.shape().str());
  }
  if (layer.pool_h < 1 || layer.pool_w < 1 || layer.stride < 1) {
    throw ShapeError("maxpool2d window and stride must be >= 1");
  }
  const std::int64_t b = input.extent(0), h = input.extent(1), w = input.extent(2),
                     c = input.extent(3);
  if (h < layer.pool_h || w < layer.pool_w) {
    throw ShapeError("maxpool2d input " + input.shape().str() + " smaller than the pool window");
  }
  const std::int64_t oh = (h - layer.pool_h) / layer.stride + 1;
  const std::int64_t ow = (w - layer.pool_w) / layer.stride + 1;
  TensorT<T> out(Shape{b, oh, ow, c});
  MaxPool2DContext ctx;
  ctx.input_shape = input.shape();
  ctx.argmax.resize(static_cast<std::size_t>(out.numel()));
  const T* pin = input.data();
  T* po = out.data();
  std::int64_t* am = ctx.argmax.data();
  parallel_for(0, b * oh * ow, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t r = lo; r < hi; ++r) {
      const std::int64_t bb = r / (oh * ow);
      const std::int64_t rem = r % (oh * ow);
      const std::int64_t oy = rem / ow;
      const std::int64_t ox = rem % ow;
      for (std::int64_t ch = 0; ch < c; ++ch) {
        T best = T(0);
        std::int64_t best_idx = -1;
        for (std::int64_t dy = 0; dy < layer.pool_h; ++dy) {
          const std::int64_t sy = oy * layer.stride + dy;
          for (std::int64_t dx = 0; dx < layer.pool_w; ++dx) {
            const std::int64_t sx = ox * layer.stride + dx;
            const std::int64_t idx = ((bb * h + sy) * w + sx) * c + ch;
            const T v = pin[idx];
            if (best_idx < 0 || v > best) {  // ties keep the lowest flat index
              best = v;
              best_idx = idx;
            }
          }
        }
        po[r * c + ch] = best;
        am[r * c + ch] = best_idx;
      }
    }
  });
  return {std::move(out), std::move(ctx)};
}

/// Routes each upstream element to its recorded argmax position.
template <typename T>
TensorT<T> maxpool2d_backward(const TensorT<T>& upstream, const MaxPool2D& layer,
                              const MaxPool2DContext& ctx) {
  (void)layer;
  if (upstream.numel() != static_cast<std::int64_t>(ctx.argmax.size())) {
    throw ShapeError("maxpool2d upstream gradient does not match the forward context");
  }
  TensorT<T> dinput = TensorT<T>::zeros(ctx.input_shape);
  const std::int64_t batch = ctx.input_shape[0];
  const std::int64_t per_sample = upstream.numel() / batch;
  const T* up = upstream.data();
  T* din = dinput.data();
  const std::int64_t* am = ctx.argmax.data();
  parallel_for(0, batch, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t b = lo; b < hi; ++b) {
      const std::int64_t r0 = b * per_sample;
      for (std::int64_t r = r0; r < r0 + per_sample; ++r) {
        din[am[r]] += up[r];
      }
    }
  });
  return dinput;
}

// ---------------------------------------------------------------------------
// ReLU.
// ---------------------------------------------------------------------------

template <typename T>
std::pair<TensorT<T>, ReluContext<T>> relu(TensorT<T> input) {
  TensorT<T> out(input.shape());
  const T* pin = input.data();
  T* po = out.data();
  const std::int64_t n = input.numel();
  parallel_for(0, n, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      po[i] = pin[i] > T(0) ? pin[i] : T(0);
    }
  });
  return {std::move(out), ReluContext<T>{std::move(input)}};
}

template <typename T>
TensorT<T> relu_backward(const TensorT<T>& upstream, const ReluContext<T>& ctx) {
  if (!upstream.same_shape(ctx.input)) {
    throw ShapeError("relu upstream gradient does not match the forward context");
  }
  TensorT<T> dinput(ctx.input.shape());
  const T* up = upstream.data();
  const T* pin = ctx.input.data();
  T* po = dinput.data();
  const std::int64_t n = dinput.numel();
  parallel_for(0, n, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      po[i] = pin[i] > T(0) ? up[i] : T(0);
    }
  });
  return dinput;
}

// ---------------------------------------------------------------------------
// Dense.
// ---------------------------------------------------------------------------

template <typename T>
std::pair<TensorT<T>, DenseContext<T>> dense_forward(TensorT<T> input, const Dense<T>& layer) {
  if (input.rank() != 2) {
    throw ShapeError("dense expects input [batch, features], got " + input.shape().str());
  }
  if (layer.weights.rank() != 2 || layer.weights.extent(0) != input.extent(1)) {
    throw ShapeError("dense weights " + layer.weights.shape().str() +
                     " incompatible with input " + input.shape().str());
  }
  const std::int64_t out_f = layer.weights.extent(1);
  if (layer.bias.numel() != out_f) {
    throw ShapeError("dense bias length must equal out_features");
  }
  const std::int64_t batch = input.extent(0);
  const std::int64_t in_f = input.extent(1);
  TensorT<T> out(Shape{batch, out_f});
  const T* px = input.data();
  const T* pw = layer.weights.data();
  const T* pb = layer.bias.data();
  T* po = out.data();
  parallel_for(0, batch, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t r = lo; r < hi; ++r) {
      T* orow = po + r * out_f;
      std::copy(pb, pb + out_f, orow);
      const T* xrow = px + r * in_f;
      for (std::int64_t p = 0; p < in_f; ++p) {
        const T xv = xrow[p];
        const T* wrow = pw + p * out_f;
        for (std::int64_t j = 0; j < out_f; ++j) {
          orow[j] += xv * wrow[j];
        }
      }
    }
  });
  return {std::move(out), DenseContext<T>{std::move(input)}};
}

template <typename T>
struct DenseGrads {
  TensorT<T> input;
  TensorT<T> weights;
  TensorT<T> bias;
};

template <typename T>
DenseGrads<T> dense_backward(const TensorT<T>& upstream, const Dense<T>& layer,
                             const DenseContext<T>& ctx, bool want_input_grad = true,
                             bool want_param_grads = true) {
  const std::int64_t batch = ctx.input.extent(0);
  const std::int64_t in_f = ctx.input.extent(1);
  const std::int64_t out_f = layer.weights.extent(1);
  if (upstream.rank() != 2 || upstream.extent(0) != batch || upstream.extent(1) != out_f) {
    throw ShapeError("dense upstream gradient must be [batch, out_features]");
  }
  DenseGrads<T> grads;
  if (want_param_grads) {
    grads.weights = TensorT<T>::zeros(layer.weights.shape());
    detail::matmul_tn_raw(ctx.input.data(), upstream.data(), grads.weights.data(), batch, in_f,
                          out_f);
    grads.bias = TensorT<T>::zeros(layer.bias.shape());
    T* db = grads.bias.data();
    const T* dy = upstream.data();
    for (std::int64_t r = 0; r < batch; ++r) {
      for (std::int64_t j = 0; j < out_f; ++j) {
        db[j] += dy[r * out_f + j];
      }
    }
  }
  if (want_input_grad) {
    grads.input = TensorT<T>(Shape{batch, in_f});
    detail::matmul_nt_raw(upstream.data(), layer.weights.data(), grads.input.data(), batch,
                          out_f, in_f);
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Dropout (inverted: survivors are scaled by 1/(1-rate) at training time, so
// inference is a pure function of the weights).
// ---------------------------------------------------------------------------

/// `streams` carries one RNG stream per batch row for reproducibility under
/// data-parallel execution, or a single stream consumed over all elements in
/// flat order. With training=false or rate=0 the input passes through
/// untouched and no randomness is consumed.
template <typename T>
std::pair<TensorT<T>, DropoutContext<T>> dropout_apply(TensorT<T> input, const Dropout& layer,
                                                       std::span<RngStream> streams,
                                                       bool training) {
  if (layer.rate < 0.0 || layer.rate >= 1.0) {
    throw ValueError("dropout rate must lie in [0, 1)");
  }
  if (!training || layer.rate == 0.0) {
    return {std::move(input), DropoutContext<T>{}};
  }
  const T scale = static_cast<T>(1.0 / (1.0 - layer.rate));
  TensorT<T> mask(input.shape());
  T* pm = mask.data();
  const std::int64_t n = input.numel();
  if (streams.size() == 1) {
    RngStream& rng = streams[0];
    for (std::int64_t i = 0; i < n; ++i) {
      pm[i] = rng.uniform() < layer.rate ? T(0) : scale;
    }
  } else {
    const std::int64_t rows = input.extent(0);
    if (static_cast<std::int64_t>(streams.size()) != rows) {
      throw ValueError("dropout needs one RNG stream per batch row (or exactly one stream)");
    }
    const std::int64_t per_row = n / rows;
    parallel_for(0, rows, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t r = lo; r < hi; ++r) {
        RngStream& rng = streams[static_cast<std::size_t>(r)];
        T* row = pm + r * per_row;
        for (std::int64_t i = 0; i < per_row; ++i) {
          row[i] = rng.uniform() < layer.rate ? T(0) : scale;
        }
      }
    });
  }
  TensorT<T> out = mul(input, mask);
  return {std::move(out), DropoutContext<T>{false, std::move(mask)}};
}

template <typename T>
TensorT<T> dropout_backward(const TensorT<T>& upstream, const DropoutContext<T>& ctx) {
  if (ctx.identity) return upstream;
  return mul(upstream, ctx.mask);
}

// ---------------------------------------------------------------------------
// Softmax (max-subtracted for overflow safety).
// ---------------------------------------------------------------------------

template <typename T>
TensorT<T> softmax(const TensorT<T>& logits) {
  if (logits.rank() != 2 || logits.extent(1) < 1) {
    throw ShapeError("softmax expects [batch, classes], got " + logits.shape().str());
  }
  const std::int64_t b = logits.extent(0);
  const std::int64_t k = logits.extent(1);
  TensorT<T> out(logits.shape());
  const T* pin = logits.data();
  T* po = out.data();
  parallel_for(0, b, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t r = lo; r < hi; ++r) {
      const T* row = pin + r * k;
      T* orow = po + r * k;
      T mx = row[0];
      for (std::int64_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
      T sum = T(0);
      for (std::int64_t j = 0; j < k; ++j) {
        orow[j] = std::exp(row[j] - mx);
        sum += orow[j];
      }
      const T inv = T(1) / sum;
      for (std::int64_t j = 0; j < k; ++j) orow[j] *= inv;
    }
  });
  return out;
}

template <typename T>
std::pair<TensorT<T>, SoftmaxContext<T>> softmax_forward(const TensorT<T>& logits) {
  TensorT<T> out = softmax(logits);
  SoftmaxContext<T> ctx{out};
  return {std::move(out), std::move(ctx)};
}

/// Jacobian-vector product: dIn = p * (dOut - sum(dOut * p)) per row.
template <typename T>
TensorT<T> softmax_backward(const TensorT<T>& upstream, const SoftmaxContext<T>& ctx) {
  if (!upstream.same_shape(ctx.probs)) {
    throw ShapeError("softmax upstream gradient does not match the forward context");
  }
  const std::int64_t b = ctx.probs.extent(0);
  const std::int64_t k = ctx.probs.extent(1);
  TensorT<T> dinput(ctx.probs.shape());
  const T* up = upstream.data();
  const T* pp = ctx.probs.data();
  T* po = dinput.data();
  parallel_for(0, b, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t r = lo; r < hi; ++r) {
      const T* urow = up + r * k;
      const T* prow = pp + r * k;
      T* orow = po + r * k;
      T dot = T(0);
      for (std::int64_t j = 0; j < k; ++j) dot += urow[j] * prow[j];
      for (std::int64_t j = 0; j < k; ++j) orow[j] = prow[j] * (urow[j] - dot);
    }
  });
  return dinput;
}

// ---------------------------------------------------------------------------
// Flatten.
// ---------------------------------------------------------------------------

template <typename T>
TensorT<T> flatten(const TensorT<T>& input) {
  if (input.rank() != 4) {
    throw ShapeError("flatten expects rank-4 input, got " + input.shape().str());
  }
  return input.reshaped(
      Shape{input.extent(0), input.extent(1) * input.extent(2) * input.extent(3)});
}

template <typename T>
std::pair<TensorT<T>, FlattenContext> flatten_forward(const TensorT<T>& input) {
  FlattenContext ctx{input.shape()};
  return {flatten(input), std::move(ctx)};
}

template <typename T>
TensorT<T> flatten_backward(const TensorT<T>& upstream, const FlattenContext& ctx) {
  return upstream.reshaped(ctx.input_shape);
}

}  // namespace mcn
