#include "mcn/optimizer.hpp"

#include <cmath>
#include <string>

#include "mcn/error.hpp"
#include "mcn/parallel.hpp"

namespace mcn {

namespace {

void validate_hyperparameters(double lr, double beta, double epsilon) {
  if (!(lr > 0.0)) throw ValueError("rmsprop learning rate must be > 0");
  if (!(beta >= 0.0 && beta < 1.0)) throw ValueError("rmsprop beta must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ValueError("rmsprop epsilon must be > 0");
}

}  // namespace

RmspropState rmsprop_init(std::span<Tensor* const> params, double lr, double beta,
                          double epsilon) {
  validate_hyperparameters(lr, beta, epsilon);
  RmspropState state;
  state.lr = lr;
  state.beta = beta;
  state.epsilon = epsilon;
  state.avg_sq_grad.reserve(params.size());
  for (const Tensor* p : params) {
    state.avg_sq_grad.push_back(Tensor::zeros(p->shape()));
  }
  return state;
}

RmspropState rmsprop_init(Model& model, double lr, double beta, double epsilon) {
  const std::vector<Tensor*> params = trainable_parameters(model);
  return rmsprop_init(std::span<Tensor* const>(params.data(), params.size()), lr, beta,
                      epsilon);
}

void rmsprop_step(std::span<Tensor* const> params, std::span<const Tensor> grads,
                  RmspropState& state) {
  if (params.size() != grads.size() || params.size() != state.avg_sq_grad.size()) {
    throw ValueError("rmsprop_step: params, grads, and state must have equal length");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& w = *params[i];
    const Tensor& g = grads[i];
    Tensor& e = state.avg_sq_grad[i];
    if (!w.same_shape(g) || !w.same_shape(e)) {
      throw ShapeError("rmsprop_step: shape mismatch at parameter " + std::to_string(i) +
                       ": param " + w.shape().str() + ", grad " + g.shape().str());
    }
    float* pw = w.data();
    const float* pg = g.data();
    float* pe = e.data();
    const double beta = state.beta;
    const double lr = state.lr;
    const double eps = state.epsilon;
    parallel_for(0, w.numel(), [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t j = lo; j < hi; ++j) {
        const double gj = static_cast<double>(pg[j]);
        const double ej = beta * static_cast<double>(pe[j]) + (1.0 - beta) * gj * gj;
        pe[j] = static_cast<float>(ej);
        pw[j] = static_cast<float>(static_cast<double>(pw[j]) - lr * gj / std::sqrt(ej + eps));
      }
    });
  }
  ++state.step_count;
}

}  // namespace mcn
