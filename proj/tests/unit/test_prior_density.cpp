#include "helpers.hpp"

#include "tempcomm/prior_density.hpp"
#include "tempcomm/verification/oracles.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <doctest.h>

using namespace tempcomm;

TEST_CASE("digamma against Boost") {
  for (double x = 0.01; x < 60.0; x *= 1.37) {
    const double want = boost::math::digamma(x);
    CHECK(digamma(x) == doctest::Approx(want).epsilon(1e-13).scale(1.0));
  }
  CHECK(digamma(1.0) == doctest::Approx(-0.5772156649015329).epsilon(1e-15));
}

TEST_CASE("J agrees across digamma, partial fractions, quadrature and Boost") {
  for (int k2 = 0; k2 <= 30; ++k2) {
    double column = 0.0;
    for (int k1 = 0; k1 <= k2; ++k1) {
      const double q = oracle::j_quadrature(k1, k2);
      CHECK(compute_J_digamma(k1, k2) == doctest::Approx(q).epsilon(1e-12).scale(1.0));
      CHECK(oracle::j_boost_digamma(k1, k2) == doctest::Approx(q).epsilon(1e-12).scale(1.0));
      if (k2 <= 25) CHECK(compute_J_partial_fractions(k1, k2) == doctest::Approx(q).epsilon(1e-10).scale(1.0));
      column += compute_J_digamma(k1, k2);
    }
    CHECK(column == doctest::Approx(1.0).epsilon(1e-13));
  }
  // Small hand values: J(0,0) = 1, J(0,1) = ln 2, J(1,1) = 1 - ln 2.
  CHECK(compute_J_digamma(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(compute_J_digamma(0, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(compute_J_digamma(1, 1) == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(compute_J_digamma(3, 2), std::invalid_argument);
  CHECK_THROWS_AS(compute_J_digamma(-1, 2), std::invalid_argument);
}

TEST_CASE("J table layout, floor and validation") {
  const JTable t(40);
  CHECK(t.n_max() == 40);
  CHECK(t.values().size() == 41 * 42 / 2);
  for (int k2 = 0; k2 <= 40; k2 += 3)
    for (int k1 = 0; k1 <= k2; ++k1) {
      CHECK(t.value(k1, k2) >= t.floor());
      CHECK(t.log_value(k1, k2) == doctest::Approx(std::log(t.value(k1, k2))));
    }
  CHECK_THROWS_AS(t.value(41, 41), std::out_of_range);
  const JTable copy = JTable::from_values(40, t.floor(), std::vector<double>(t.values().begin(), t.values().end()));
  CHECK(copy.value(7, 30) == t.value(7, 30));
  CHECK_THROWS(JTable::from_values(2, t.floor(), {1.0, 0.5}));
  CHECK_THROWS(JTable::from_values(1, t.floor(), {1.0, 0.5, 1.5}));
  CHECK_THROWS(JTable::from_values(1, t.floor(), {1.0, 0.0, 0.5}));
}

TEST_CASE("first-layer law against the Gamma-ratio oracle") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(9));
    const int k = 1 + static_cast<int>(rng.uniform_int(4));
    const auto g = testing::random_labels(n, k, rng);
    CHECK(log_prob_first_layer(g, k).log() == doctest::Approx(oracle::first_layer_log(g, k)).epsilon(1e-12));
  }
}

TEST_CASE("LECS transition against the generative-step oracle") {
  Rng rng(2);
  const JTable table(10);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(10));
    const int k = 1 + static_cast<int>(rng.uniform_int(4));
    const auto prev = testing::random_labels(n, k, rng);
    const auto cur = testing::random_labels(n, k, rng);
    CHECK(lecs_transition_logprob(prev, cur, k, table).log() ==
          doctest::Approx(oracle::lecs_transition_log(prev, cur, k)).epsilon(1e-10));
  }
}

TEST_CASE("LECS transitions are normalised for random and fixed retention") {
  const JTable table(4);
  for (const RetentionMode& mode : {RetentionMode::random(), RetentionMode::fixed(0.3), RetentionMode::fixed(0.0),
                                    RetentionMode::fixed(1.0)}) {
    const std::vector<Label> prev{0, 0, 1, 2};
    double total = 0.0;
    oracle::for_each_assignment(4, 1, 3, [&](const CommunityAssignment& cur) {
      total += lecs_transition_logprob(prev, cur.layer(0), 3, table, mode).prob();
    });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("Bazzi statistics") {
  const std::vector<Label> prev{0, 0, 1, 1, 2};
  const std::vector<Label> cur{0, 1, 1, 0, 0};
  std::vector<std::int64_t> same(3), move(3);
  bazzi_statistics(prev, cur, same, move);
  CHECK(same == std::vector<std::int64_t>{1, 1, 0});
  CHECK(move == std::vector<std::int64_t>{2, 1, 0});
}

TEST_CASE("Bazzi Monte Carlo estimate converges to the exact integral") {
  Rng rng(3), mc(4);
  for (int trial = 0; trial < 6; ++trial) {
    const int k = 2 + trial % 2;
    const auto prev = testing::random_labels(6, k, rng);
    const auto cur = testing::random_labels(6, k, rng);
    const double exact = oracle::bazzi_transition_log(prev, cur, k);
    const double estimate = bazzi_transition_logprob(prev, cur, k, MonteCarloBudget{400000}, mc).log();
    CHECK(estimate == doctest::Approx(exact).epsilon(0.01).scale(1.0));
  }
}

TEST_CASE("Bazzi draws: factors and integrands are consistent") {
  Rng rng(5);
  BazziDraws draws(3, 50);
  draws.redraw(rng);
  const std::vector<std::int64_t> same{2, 0, 1}, move{1, 3, 0};
  std::vector<double> out(50);
  draws.log_integrands(same, move, out);
  for (int d = 0; d < 50; ++d) {
    double want = 0.0;
    for (Label s = 0; s < 3; ++s) {
      want += static_cast<double>(same[static_cast<std::size_t>(s)]) * draws.log_same(d, s) +
              static_cast<double>(move[static_cast<std::size_t>(s)]) * draws.log_move(d, s);
      CHECK(std::log(draws.same_factors(s)[static_cast<std::size_t>(d)]) == doctest::Approx(draws.log_same(d, s)));
      CHECK(draws.same_factors(s)[static_cast<std::size_t>(d)] >= draws.move_factors(s)[static_cast<std::size_t>(d)]);
    }
    CHECK(out[static_cast<std::size_t>(d)] == doctest::Approx(want).epsilon(1e-12));
  }
  CHECK(draws.log_estimate(same, move) == doctest::Approx(log_sum_exp(out) - std::log(50.0)).epsilon(1e-12));
}

TEST_CASE("joint densities: exact models, Monte Carlo Bazzi and Yang rejection") {
  const JTable table(3);
  Rng mc(6);
  CommunityAssignment g(3, 2, 2, {0, 1, 1, 1, 1, 0});
  for (const std::string name : {"uniform", "lecs", "lecs:0.4"}) {
    const PriorModel m{parse_prior_kind(name), 3, 2, 2};
    double total = 0.0;
    oracle::for_each_assignment(3, 2, 2, [&](const CommunityAssignment& h) {
      total += log_prob_assignment(h, m, table, {}, mc).prob();
    });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  const PriorModel lecs{Lecs{}, 3, 2, 2};
  CHECK(log_prob_assignment(g, lecs, table, {}, mc).log() == doctest::Approx(oracle::log_prior(g, lecs)).epsilon(1e-12));
  const PriorModel bazzi{BazziMarkov{}, 3, 2, 2};
  CHECK(log_prob_assignment(g, bazzi, table, MonteCarloBudget{200000}, mc).log() ==
        doctest::Approx(oracle::log_prior(g, bazzi)).epsilon(0.01).scale(1.0));
  CHECK_THROWS_AS(log_prob_assignment(g, PriorModel{YangMarkov{}, 3, 2, 2}, table, {}, mc), UnsupportedModel);
  CHECK_THROWS_AS(log_prob_assignment(g, PriorModel{Lecs{}, 3, 2, 2}, JTable(1), {}, mc), std::invalid_argument);
}
