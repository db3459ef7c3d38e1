#include <benchmark/benchmark.h>

#include "mcn/layers.hpp"
#include "mcn/rng.hpp"
#include "mcn/tensor.hpp"

using mcn::Shape;
using mcn::Tensor;

namespace {

Tensor random_tensor(const Shape& shape, std::uint64_t seed) {
  Tensor out(shape);
  mcn::RngStream rng(seed);
  for (std::int64_t i = 0; i < out.numel(); ++i)
    out[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
  return out;
}

mcn::Conv2D<float> block_conv(std::int64_t in_ch, std::int64_t out_ch) {
  mcn::Conv2D<float> layer;
  layer.weights = random_tensor(Shape{3, 3, in_ch, out_ch}, 1);
  layer.bias = random_tensor(Shape{out_ch}, 2);
  layer.stride = 1;
  layer.padding = mcn::Padding::kSame;
  layer.name = "bench";
  return layer;
}

void BM_Conv2dForward(benchmark::State& state) {
  const std::int64_t ch = state.range(0);
  const Tensor input = random_tensor(Shape{8, 32, 32, ch}, 3);
  const mcn::Conv2D<float> layer = block_conv(ch, ch);
  for (auto _ : state) {
    auto out = mcn::conv2d_forward(input, layer);
    benchmark::DoNotOptimize(out.first.data());
  }
  state.SetItemsProcessed(state.iterations() * input.extent(0));
}
BENCHMARK(BM_Conv2dForward)->Arg(8)->Arg(16)->Arg(32);

void BM_Conv2dBackward(benchmark::State& state) {
  const std::int64_t ch = state.range(0);
  const Tensor input = random_tensor(Shape{8, 32, 32, ch}, 3);
  const mcn::Conv2D<float> layer = block_conv(ch, ch);
  auto [output, ctx] = mcn::conv2d_forward(input, layer);
  const Tensor upstream = random_tensor(output.shape(), 4);
  for (auto _ : state) {
    auto grads = mcn::conv2d_backward(upstream, layer, ctx);
    benchmark::DoNotOptimize(grads.input.data());
  }
  state.SetItemsProcessed(state.iterations() * input.extent(0));
}
BENCHMARK(BM_Conv2dBackward)->Arg(8)->Arg(16)->Arg(32);

void BM_Matmul(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  const Tensor a = random_tensor(Shape{n, n}, 5);
  const Tensor b = random_tensor(Shape{n, n}, 6);
  for (auto _ : state) {
    Tensor c = mcn::matmul(a, b);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_MaxPool(benchmark::State& state) {
  const Tensor input = random_tensor(Shape{8, 32, 32, 32}, 7);
  const mcn::MaxPool2D layer{2, 2, 2, "bench_pool"};
  for (auto _ : state) {
    auto out = mcn::maxpool2d_forward(input, layer);
    benchmark::DoNotOptimize(out.first.data());
  }
  state.SetItemsProcessed(state.iterations() * input.extent(0));
}
BENCHMARK(BM_MaxPool);

}  // namespace

BENCHMARK_MAIN();
