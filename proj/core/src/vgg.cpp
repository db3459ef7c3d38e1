#include "mcn/vgg.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mcn/error.hpp"
#include "mcn/rng.hpp"

namespace mcn {

namespace {

// Uniform Glorot: +-sqrt(6 / (fan_in + fan_out)), one derived stream per
// layer so adding layers elsewhere never shifts another layer's draw.
Tensor glorot_uniform(const Shape& shape, std::int64_t fan_in, std::int64_t fan_out,
                      std::uint64_t seed, const std::string& layer_name) {
  RngStream rng(derive_seed(seed, "init/" + layer_name));
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor out(shape);
  float* p = out.data();
  for (std::int64_t i = 0; i < out.numel(); ++i) {
    p[i] = static_cast<float>(rng.uniform(-limit, limit));
  }
  return out;
}

Conv2D<float> make_conv(std::int64_t in_ch, std::int64_t out_ch, std::string name,
                        std::uint64_t seed) {
  Conv2D<float> conv;
  conv.weights = glorot_uniform(Shape{3, 3, in_ch, out_ch}, 9 * in_ch, 9 * out_ch, seed, name);
  conv.bias = Tensor::zeros(Shape{out_ch});
  conv.stride = 1;
  conv.padding = Padding::kSame;
  conv.activation = Activation::kRelu;
  conv.name = std::move(name);
  return conv;
}

Dense<float> make_dense(std::int64_t in_f, std::int64_t out_f, Activation act, std::string name,
                        std::uint64_t seed) {
  Dense<float> dense;
  dense.weights = glorot_uniform(Shape{in_f, out_f}, in_f, out_f, seed, name);
  dense.bias = Tensor::zeros(Shape{out_f});
  dense.activation = act;
  dense.name = std::move(name);
  return dense;
}

MaxPool2D make_pool(std::string name) {
  MaxPool2D pool;
  pool.pool_h = 2;
  pool.pool_w = 2;
  pool.stride = 2;
  pool.name = std::move(name);
  return pool;
}

struct BlockSpec {
  std::int64_t convs;
  std::int64_t channels;
};

Model build_blocks(const Shape& input_shape, std::int64_t class_count,
                   const std::vector<BlockSpec>& blocks, std::int64_t fc1_width,
                   bool second_fc_block, std::uint64_t seed) {
  Model model;
  model.input_shape = input_shape;
  model.class_count = class_count;
  const std::int64_t h = input_shape[0];
  const std::int64_t w = input_shape[1];
  std::int64_t channels = input_shape[2];
  model.layers.push_back({InputLayer{"input_1"}, true});
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::string block = "block" + std::to_string(b + 1);
    for (std::int64_t c = 0; c < blocks[b].convs; ++c) {
      const std::string name = block + "_conv" + std::to_string(c + 1);
      model.layers.push_back({make_conv(channels, blocks[b].channels, name, seed), true});
      channels = blocks[b].channels;
    }
    model.layers.push_back({make_pool(block + "_pool"), true});
  }
  const std::int64_t halvings = static_cast<std::int64_t>(blocks.size());
  const std::int64_t flat = (h >> halvings) * (w >> halvings) * channels;
  model.layers.push_back({Flatten{"flatten"}, true});
  model.layers.push_back({make_dense(flat, fc1_width, Activation::kRelu, "fc1", seed), true});
  model.layers.push_back({Dropout{0.5, "fc1_drop"}, true});
  std::int64_t head_in = fc1_width;
  if (second_fc_block) {
    model.layers.push_back(
        {make_dense(fc1_width, fc1_width, Activation::kRelu, "fc2", seed), true});
    model.layers.push_back({Dropout{0.5, "fc2_drop"}, true});
    head_in = fc1_width;
  }
  model.layers.push_back(
      {make_dense(head_in, class_count, Activation::kSoftmax, "predictions", seed), true});
  return model;
}

void validate_input(const Shape& input_shape, std::int64_t class_count, std::int64_t divisor,
                    std::int64_t required_channels) {
  if (input_shape.rank() != 3) {
    throw ShapeError("input shape must be [h,w,c], got " + input_shape.str());
  }
  const std::int64_t h = input_shape[0];
  const std::int64_t w = input_shape[1];
  if (h < divisor || w < divisor || h % divisor != 0 || w % divisor != 0) {
    throw ShapeError("input extents must be >= " + std::to_string(divisor) +
                     " and divisible by " + std::to_string(divisor) + ", got " +
                     input_shape.str());
  }
  if (required_channels > 0 && input_shape[2] != required_channels) {
    throw ShapeError("expected " + std::to_string(required_channels) + " input channels, got " +
                     input_shape.str());
  }
  if (class_count < 1) {
    throw ValueError("class count must be positive");
  }
}

}  // namespace

Model build_vgg16(const Shape& input_shape, std::int64_t class_count, std::uint64_t seed) {
  validate_input(input_shape, class_count, 32, 3);
  return build_blocks(input_shape, class_count,
                      {{2, 64}, {2, 128}, {3, 256}, {3, 512}, {3, 512}},
                      /*fc1_width=*/4096, /*second_fc_block=*/true, seed);
}

Model build_vgg_mini(const Shape& input_shape, std::int64_t class_count, std::uint64_t seed) {
  validate_input(input_shape, class_count, 8, 0);
  return build_blocks(input_shape, class_count, {{2, 8}, {2, 16}, {2, 32}},
                      /*fc1_width=*/64, /*second_fc_block=*/false, seed);
}

}  // namespace mcn
