#include "helpers.hpp"

#include "tempcomm/likelihood.hpp"

#include <doctest.h>

using namespace tempcomm;

TEST_CASE("LogProb multiplies in log space") {
  const auto a = LogProb::from_prob(0.5);
  const auto b = LogProb::from_prob(0.25);
  CHECK((a * b).prob() == doctest::Approx(0.125).epsilon(1e-15));
  CHECK((b / a).prob() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(LogProb::zero() < a);
  CHECK(LogProb::one().log() == 0.0);
}

TEST_CASE("log_sum_exp handles large values and -inf") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(log_sum_exp(std::vector<double>{1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(log_sum_exp(std::vector<double>{-inf, 0.0}) == 0.0);
  CHECK(log_sum_exp(std::vector<double>{-inf, -inf}) == -inf);
}

TEST_CASE("log factorials agree with lgamma") {
  const LogFactorials lf(300);
  for (int m = 0; m <= 300; m += 7) CHECK(lf(m) == doctest::Approx(std::lgamma(m + 1.0)).epsilon(1e-13));
  CHECK(lf.log_binomial(10, 3) == doctest::Approx(std::log(120.0)).epsilon(1e-13));
  CHECK(lf.log_binomial(3, 4) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(lf(301), std::out_of_range);
}

TEST_CASE("temporal networks validate their input") {
  CHECK_THROWS_AS(TemporalNetwork(3, {{{0, 0}}}), std::invalid_argument);
  CHECK_THROWS_AS(TemporalNetwork(3, {{{0, 3}}}), std::invalid_argument);
  CHECK_THROWS_AS(TemporalNetwork(3, {{{0, 1}, {1, 0}}}), std::invalid_argument);
  CHECK_THROWS_AS(TemporalNetwork::from_dense(2, {{0, 1, 0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(TemporalNetwork::from_dense(2, {{1, 0, 0, 1}}), std::invalid_argument);

  const TemporalNetwork A(4, {{{0, 1}, {2, 1}}, {}});
  CHECK(A.layers() == 2);
  CHECK(A.adjacent(0, 1, 2));
  CHECK(A.adjacent(0, 2, 1));
  CHECK_FALSE(A.adjacent(1, 0, 1));
  CHECK(A.edge_count(0) == 2);
  CHECK(A.neighbors(0, 1).size() == 2);
  CHECK(A == TemporalNetwork::from_dense(4, {{0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0},
                                             std::vector<std::uint8_t>(16, 0)}));
}

TEST_CASE("assignments store labels layer-major and keep a live fingerprint") {
  CommunityAssignment g(3, 2, 3);
  g.set(1, 1, 2);
  CHECK(g.at(1, 1) == 2);
  CHECK(g.layer(1)[1] == 2);
  CHECK_THROWS(g.set(0, 0, 3));
  CHECK_THROWS(CommunityAssignment(2, 1, 2, {0, 2}));

  const CommunityAssignment same(3, 2, 3, {0, 0, 0, 0, 2, 0});
  CHECK(g == same);
  CHECK(g.fingerprint() == same.fingerprint());

  auto h = same;
  h.swap_labels(0, 2, 1);
  CHECK(h.layer(1)[0] == 2);
  CHECK(h.layer(1)[1] == 0);
  CHECK(h.layer(0)[0] == 0);
  h.swap_labels(0, 2, 1);
  CHECK(h == same);
  CHECK(h.fingerprint() == same.fingerprint());
}

TEST_CASE("weak compositions, sizes and transition counts") {
  const WeakComposition c({2, 0, 3});
  CHECK(c.total() == 5);
  CHECK_THROWS(WeakComposition({1, -1}));

  const auto g = CommunityAssignment::from_layers(3, {{0, 0, 1, 2}, {0, 1, 1, 1}});
  CHECK(community_sizes(g, 0) == WeakComposition({2, 1, 1}));
  CHECK(community_sizes(g, 1) == WeakComposition({1, 3, 0}));
  const auto t = transition_counts(g.layer(0), g.layer(1), 3);
  CHECK(t(0, 0) == 1);
  CHECK(t(0, 1) == 1);
  CHECK(t(1, 1) == 1);
  CHECK(t(2, 1) == 1);
  CHECK(t(2, 2) == 0);
}

TEST_CASE("block counts match direct pair counting") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 7;
    std::vector<std::vector<Edge>> layers(2);
    for (auto& edges : layers)
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          if (rng.bernoulli(0.4)) edges.push_back({i, j});
    const TemporalNetwork A(n, layers);
    const CommunityAssignment g(n, 2, 3, testing::random_labels(2 * n, 3, rng));
    const BlockCounts bc = block_counts(A, g);
    CHECK(bc.source_fingerprint() == g.fingerprint());
    for (int l = 0; l < 2; ++l)
      for (Label r = 0; r < 3; ++r)
        for (Label s = 0; s < 3; ++s) {
          std::int64_t m = 0, t = 0;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              if (g.at(i, l) != r || g.at(j, l) != s) continue;
              if (r == s && j <= i) continue;
              if (i == j) continue;
              ++t;
              m += A.adjacent(l, i, j);
            }
          CHECK(bc.m(l, r, s) == m);
          CHECK(bc.t(l, r, s) == t);
        }
    bc.check_invariants();
  }
}

TEST_CASE("block count invariants catch m > t") {
  BlockCounts bc(1, 2);
  bc.set_size(0, 0, 1);
  bc.set_size(0, 1, 1);
  bc.add_edges(0, 0, 0, 1);
  CHECK_THROWS_AS(bc.check_invariants(), InvariantViolation);
}

TEST_CASE("size histograms count, merge and normalise") {
  SizeHistogram a(3), b(3);
  a.add(1, 3);
  b.add(3);
  a.merge(b);
  CHECK(a.samples() == 4);
  CHECK(a.frequency(1) == 0.75);
  CHECK(a.frequencies() == std::vector<double>{0.0, 0.75, 0.0, 0.25});
  CHECK_THROWS(a.add(4));
  CHECK_THROWS(a.merge(SizeHistogram(2)));
}
