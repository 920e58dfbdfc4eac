#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace tempcomm;

TEST_CASE("same seed gives the same stream") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs = differs || x != c.next();
  }
  CHECK(differs);
}

TEST_CASE("substreams are reproducible and distinct") {
  auto first = [](std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    return Rng::substream(seed, keys).next();
  };
  CHECK(first(7, {1, 2}) == first(7, {1, 2}));
  CHECK(first(7, {1, 2}) != first(7, {2, 1}));
  CHECK(first(7, {1}) != first(7, {1, 0}));
  CHECK(first(7, {1}) != first(8, {1}));
}

TEST_CASE("uniform draws lie in range with the right mean") {
  Rng rng(1);
  double sum = 0.0;
  constexpr int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double v = rng.uniform_open();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
    sum += u;
  }
  // sd of the mean is sqrt(1/12 / n) ~ 6.5e-4
  CHECK(std::abs(sum / n - 0.5) < 0.004);
}

TEST_CASE("uniform_int is uniform on its range") {
  Rng rng(2);
  std::vector<std::uint64_t> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.uniform_int(7)];
  CHECK(testing::max_z(counts, std::vector<double>(7, 1.0 / 7)) < 5.0);
  CHECK(rng.uniform_int(1) == 0);
}

TEST_CASE("exponential has unit mean") {
  Rng rng(3);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) sum += rng.exponential();
  CHECK(std::abs(sum / 100000 - 1.0) < 0.02);
}

TEST_CASE("categorical follows its weights") {
  Rng rng(4);
  const std::vector<double> w{1.0, 0.0, 3.0, 6.0};
  std::vector<std::uint64_t> counts(4, 0);
  for (int i = 0; i < 100000; ++i) ++counts[rng.categorical(w)];
  CHECK(counts[1] == 0);
  CHECK(testing::max_z(counts, {0.1, 0.0, 0.3, 0.6}) < 5.0);
  CHECK_THROWS_AS(rng.categorical(std::vector<double>{0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("shuffle is a permutation and covers all orders") {
  Rng rng(5);
  std::vector<std::uint64_t> counts(6, 0);
  for (int t = 0; t < 60000; ++t) {
    std::vector<int> v{0, 1, 2};
    rng.shuffle(std::span(v));
    int rank = 0;
    std::vector<int> order{0, 1, 2};
    while (order != v) {
      std::next_permutation(order.begin(), order.end());
      ++rank;
    }
    ++counts[static_cast<std::size_t>(rank)];
  }
  CHECK(testing::max_z(counts, std::vector<double>(6, 1.0 / 6)) < 5.0);
}
