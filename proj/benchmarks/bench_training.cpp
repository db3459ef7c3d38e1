#include <benchmark/benchmark.h>

#include <vector>

#include "mcn/loss.hpp"
#include "mcn/model.hpp"
#include "mcn/optimizer.hpp"
#include "mcn/rng.hpp"
#include "mcn/tensor.hpp"
#include "mcn/vgg.hpp"

using mcn::Shape;
using mcn::Tensor;

namespace {

Tensor random_batch(std::int64_t b, std::uint64_t seed) {
  Tensor out(Shape{b, 32, 32, 1});
  mcn::RngStream rng(seed);
  for (std::int64_t i = 0; i < out.numel(); ++i)
    out[i] = static_cast<float>(rng.uniform(0.0, 1.0));
  return out;
}

// One optimizer step over a batch: forward, loss, backward, update.
void BM_TrainStep(benchmark::State& state) {
  const std::int64_t batch = state.range(0);
  mcn::Model model = mcn::build_vgg_mini(Shape{32, 32, 1}, 10, 1);
  const std::vector<Tensor*> params = mcn::trainable_parameters(model);
  mcn::RmspropState opt =
      mcn::rmsprop_init(std::span<Tensor* const>(params.data(), params.size()), 1e-3);
  const Tensor batch_data = random_batch(batch, 2);
  std::vector<std::int64_t> labels(static_cast<std::size_t>(batch));
  for (std::size_t i = 0; i < labels.size(); ++i)
    labels[i] = static_cast<std::int64_t>(i % 10);
  const Tensor targets = mcn::one_hot<float>(labels, 10);

  std::uint64_t round = 0;
  for (auto _ : state) {
    std::vector<mcn::RngStream> streams;
    streams.reserve(static_cast<std::size_t>(batch));
    for (std::int64_t i = 0; i < batch; ++i)
      streams.emplace_back(mcn::derive_seed(3, "bench", round, static_cast<std::uint64_t>(i)));
    ++round;
    mcn::ForwardResult fwd = mcn::model_forward(model, batch_data, /*training=*/true,
                                                std::span<mcn::RngStream>(streams));
    const mcn::LossValue loss = mcn::categorical_cross_entropy(fwd.output, targets);
    const std::vector<Tensor> grads = mcn::model_backward(model, loss.logit_grad, fwd.contexts);
    mcn::rmsprop_step(std::span<Tensor* const>(params.data(), params.size()),
                      std::span<const Tensor>(grads.data(), grads.size()), opt);
    benchmark::DoNotOptimize(loss.value);
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_TrainStep)->Arg(8)->Arg(32);

void BM_Inference(benchmark::State& state) {
  const std::int64_t batch = state.range(0);
  const mcn::Model model = mcn::build_vgg_mini(Shape{32, 32, 1}, 10, 1);
  const Tensor batch_data = random_batch(batch, 4);
  for (auto _ : state) {
    mcn::ForwardResult fwd = mcn::model_forward(model, batch_data, /*training=*/false);
    benchmark::DoNotOptimize(fwd.output.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_Inference)->Arg(1)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
