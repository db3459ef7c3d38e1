#include <doctest.h>

#include "gradcheck.hpp"

// Spot checks at a few seeds; the acceptance binary sweeps ten seeds per op.
TEST_SUITE("gradcheck") {
  TEST_CASE("conv2d analytic gradients match finite differences") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const tsup::GradCheck gc = tsup::gradcheck_conv2d(seed);
      CHECK(gc.checked > 0);
      CHECK(gc.max_rel_err <= tsup::kGradTol);
    }
  }

  TEST_CASE("dense analytic gradients match finite differences") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const tsup::GradCheck gc = tsup::gradcheck_dense(seed);
      CHECK(gc.checked > 0);
      CHECK(gc.max_rel_err <= tsup::kGradTol);
    }
  }

  TEST_CASE("relu analytic gradients match finite differences") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      CHECK(tsup::gradcheck_relu(seed).max_rel_err <= tsup::kGradTol);
    }
  }

  TEST_CASE("maxpool analytic gradients match finite differences") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      CHECK(tsup::gradcheck_maxpool(seed).max_rel_err <= tsup::kGradTol);
    }
  }

  TEST_CASE("fixed-mask dropout gradients match finite differences") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      CHECK(tsup::gradcheck_dropout(seed).max_rel_err <= tsup::kGradTol);
    }
  }

  TEST_CASE("fused softmax cross-entropy gradients match finite differences") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      CHECK(tsup::gradcheck_softmax_ce(seed).max_rel_err <= tsup::kGradTol);
    }
  }
}
