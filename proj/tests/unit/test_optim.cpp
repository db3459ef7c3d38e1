#include <doctest.h>

#include <array>
#include <vector>

#include "mcn/optimizer.hpp"
#include "mcn/tensor.hpp"

using mcn::Shape;
using mcn::Tensor;

namespace {

// Double-precision replay of the update rule, frozen as the oracle for the
// scalar traces below:
//   E_t = 0.9 E_{t-1} + 0.1 g^2,  w_t = w_{t-1} - 0.01 g / sqrt(E_t + 1e-8)
// with w_0 = 1, E_0 = 0, g = 0.5 throughout.
constexpr double kTraceW[5] = {0.9683772297228697, 0.9454356587507156, 0.9262261914085059,
                               0.9091738551959104, 0.8935471390623908};
constexpr double kTraceE[5] = {0.025, 0.0475, 0.06775, 0.085975, 0.1023775};

}  // namespace

TEST_SUITE("optim") {
  TEST_CASE("init validates hyperparameters and zeroes the averages") {
    Tensor w = Tensor::full(Shape{2, 2}, 1.0f);
    std::array<Tensor*, 1> params{&w};
    const mcn::RmspropState state = mcn::rmsprop_init(params, 0.001);
    CHECK(state.lr == 0.001);
    CHECK(state.beta == 0.9);
    CHECK(state.epsilon == 1e-8);
    CHECK(state.step_count == 0);
    REQUIRE(state.avg_sq_grad.size() == 1);
    CHECK(state.avg_sq_grad[0].shape() == w.shape());
    for (std::int64_t i = 0; i < 4; ++i) {
      CHECK(state.avg_sq_grad[0][i] == 0.0f);
    }
    CHECK_THROWS_AS(mcn::rmsprop_init(params, 0.0), mcn::ValueError);
    CHECK_THROWS_AS(mcn::rmsprop_init(params, 0.001, 1.0), mcn::ValueError);
    CHECK_THROWS_AS(mcn::rmsprop_init(params, 0.001, -0.1), mcn::ValueError);
    CHECK_THROWS_AS(mcn::rmsprop_init(params, 0.001, 0.9, 0.0), mcn::ValueError);
  }

  TEST_CASE("single step reproduces the worked scalar example") {
    Tensor w = Tensor::full(Shape{1}, 1.0f);
    std::array<Tensor*, 1> params{&w};
    mcn::RmspropState state = mcn::rmsprop_init(params, 0.01);
    std::vector<Tensor> grads{Tensor::full(Shape{1}, 0.5f)};
    mcn::rmsprop_step(params, grads, state);
    CHECK(state.step_count == 1);
    CHECK(state.avg_sq_grad[0][0] == doctest::Approx(0.025).epsilon(1e-7));
    CHECK(w[0] == doctest::Approx(0.968377).epsilon(1e-6));
  }

  TEST_CASE("five-step scalar trace follows the frozen oracle") {
    Tensor w = Tensor::full(Shape{1}, 1.0f);
    std::array<Tensor*, 1> params{&w};
    mcn::RmspropState state = mcn::rmsprop_init(params, 0.01);
    std::vector<Tensor> grads{Tensor::full(Shape{1}, 0.5f)};
    for (int t = 0; t < 5; ++t) {
      mcn::rmsprop_step(params, grads, state);
      CHECK(static_cast<double>(w[0]) == doctest::Approx(kTraceW[t]).epsilon(1e-6));
      CHECK(static_cast<double>(state.avg_sq_grad[0][0]) ==
            doctest::Approx(kTraceE[t]).epsilon(1e-6));
    }
    CHECK(state.step_count == 5);
  }

  TEST_CASE("a zero gradient leaves the weight untouched") {
    Tensor w = Tensor::full(Shape{3}, 2.0f);
    std::array<Tensor*, 1> params{&w};
    mcn::RmspropState state = mcn::rmsprop_init(params, 0.5);
    std::vector<Tensor> grads{Tensor::zeros(Shape{3})};
    mcn::rmsprop_step(params, grads, state);
    for (int i = 0; i < 3; ++i) {
      CHECK(w[i] == 2.0f);
    }
  }

  TEST_CASE("step validates the gradient list") {
    Tensor w = Tensor::full(Shape{2}, 1.0f);
    std::array<Tensor*, 1> params{&w};
    mcn::RmspropState state = mcn::rmsprop_init(params, 0.01);
    std::vector<Tensor> none;
    CHECK_THROWS_AS(mcn::rmsprop_step(params, none, state), mcn::ValueError);
    std::vector<Tensor> wrong{Tensor::zeros(Shape{3})};
    CHECK_THROWS_AS(mcn::rmsprop_step(params, wrong, state), mcn::ShapeError);
  }

  TEST_CASE("each parameter keeps its own average") {
    Tensor a = Tensor::full(Shape{1}, 1.0f);
    Tensor b = Tensor::full(Shape{1}, 1.0f);
    std::array<Tensor*, 2> params{&a, &b};
    mcn::RmspropState state = mcn::rmsprop_init(params, 0.01);
    std::vector<Tensor> grads{Tensor::full(Shape{1}, 0.5f), Tensor::zeros(Shape{1})};
    mcn::rmsprop_step(params, grads, state);
    CHECK(a[0] < 1.0f);
    CHECK(b[0] == 1.0f);
    CHECK(state.avg_sq_grad[0][0] > 0.0f);
    CHECK(state.avg_sq_grad[1][0] == 0.0f);
  }
}
