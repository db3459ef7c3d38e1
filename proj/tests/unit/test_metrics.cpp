#include <doctest.h>

#include <vector>

#include "mcn/metrics.hpp"
#include "mcn/tensor.hpp"

TEST_SUITE("metrics") {
  TEST_CASE("accuracy is the fraction of exact label matches") {
    const std::vector<std::int64_t> pred{0, 1, 2, 2};
    const std::vector<std::int64_t> truth{0, 1, 2, 1};
    CHECK(mcn::accuracy(pred, truth) == doctest::Approx(0.75));
    const std::vector<std::int64_t> empty;
    CHECK_THROWS_AS(mcn::accuracy(empty, empty), mcn::ValueError);
    CHECK_THROWS_AS(mcn::accuracy(pred, empty), mcn::ValueError);
  }

  TEST_CASE("one-vs-rest confusion counts on a worked table") {
    // truth:  0 0 1 1 2
    // pred:   0 1 1 1 0
    const std::vector<std::int64_t> truth{0, 0, 1, 1, 2};
    const std::vector<std::int64_t> pred{0, 1, 1, 1, 0};
    const auto counts = mcn::confusion_counts(pred, truth, 3);
    REQUIRE(counts.size() == 3);
    // Class 0 as positive: tp=1 (sample 0), fp=1 (sample 4), fn=1 (sample 1), tn=2.
    CHECK(counts[0].tp == 1);
    CHECK(counts[0].fp == 1);
    CHECK(counts[0].fn == 1);
    CHECK(counts[0].tn == 2);
    // Class 1: tp=2, fp=1 (sample 1), fn=0, tn=2.
    CHECK(counts[1].tp == 2);
    CHECK(counts[1].fp == 1);
    CHECK(counts[1].fn == 0);
    CHECK(counts[1].tn == 2);
    // Class 2: tp=0, fp=0, fn=1 (sample 4), tn=4.
    CHECK(counts[2].tp == 0);
    CHECK(counts[2].fp == 0);
    CHECK(counts[2].fn == 1);
    CHECK(counts[2].tn == 4);
    // Each class's counts partition the sample set.
    for (const auto& c : counts) {
      CHECK(c.tp + c.tn + c.fp + c.fn == 5);
    }
  }

  TEST_CASE("confusion counts validate label ranges") {
    const std::vector<std::int64_t> truth{0, 3};
    const std::vector<std::int64_t> pred{0, 1};
    CHECK_THROWS_AS(mcn::confusion_counts(pred, truth, 3), mcn::ValueError);
  }

  TEST_CASE("argmax_rows breaks ties toward the lowest index") {
    mcn::Tensor t(mcn::Shape{2, 3});
    t[0] = 1.0f;
    t[1] = 3.0f;
    t[2] = 3.0f;
    t[3] = 7.0f;
    t[4] = 2.0f;
    t[5] = 7.0f;
    const auto rows = mcn::argmax_rows(t);
    CHECK(rows[0] == 1);
    CHECK(rows[1] == 0);
  }
}
