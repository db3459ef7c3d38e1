#pragma once

#include <cstdint>

#include "mcn/model.hpp"

namespace mcn {

/// Standard VGG-16 (configuration D): five conv blocks named block1..block5
/// (2+2+3+3+3 convs of 64/128/256/512/512 channels, 3x3 stride 1 same
/// padding, ReLU, each block closed by blockN_pool 2x2 stride 2), then
/// flatten, fc1(4096)+ReLU+dropout(0.5), fc2(4096)+ReLU+dropout(0.5), and a
/// softmax `predictions` layer. Input [h,w,3] with h,w >= 32 and divisible by
/// 32. Parameters draw from a seeded uniform Glorot initializer; biases zero.
Model build_vgg16(const Shape& input_shape, std::int64_t class_count, std::uint64_t seed = 0);

/// Desk-scale sibling with the same naming scheme: three blocks of two convs
/// (8/16/32 channels), flatten, fc1(64)+ReLU+dropout(0.5), softmax
/// `predictions`. Input [h,w,c] with h,w divisible by 8.
Model build_vgg_mini(const Shape& input_shape, std::int64_t class_count, std::uint64_t seed = 0);

}  // namespace mcn
