#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcn/model.hpp"
#include "mcn/tensor.hpp"

namespace mcn {

/// RMSprop state: per-parameter moving average of squared gradients plus the
/// hyperparameters. One avg_sq_grad tensor per trainable parameter, in
/// trainable_parameters() order.
struct RmspropState {
  double lr = 2e-5;
  double beta = 0.9;
  double epsilon = 1e-8;
  std::int64_t step_count = 0;
  std::vector<Tensor> avg_sq_grad;
};

/// Fresh state (all-zero averages) for an explicit parameter list.
RmspropState rmsprop_init(std::span<Tensor* const> params, double lr = 2e-5, double beta = 0.9,
                          double epsilon = 1e-8);

/// Fresh state covering the model's trainable parameters.
RmspropState rmsprop_init(Model& model, double lr = 2e-5, double beta = 0.9,
                          double epsilon = 1e-8);

/// One update over all parameters:
///   E <- beta*E + (1-beta)*g^2
///   w <- w - lr * g / sqrt(E + epsilon)
/// Arithmetic runs in 64-bit; storage stays 32-bit.
void rmsprop_step(std::span<Tensor* const> params, std::span<const Tensor> grads,
                  RmspropState& state);

}  // namespace mcn
