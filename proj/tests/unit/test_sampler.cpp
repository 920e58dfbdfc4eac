#include "helpers.hpp"

#include "tempcomm/analysis.hpp"
#include "tempcomm/sampler.hpp"
#include "tempcomm/verification/oracles.hpp"

#include <doctest.h>

using namespace tempcomm;

namespace {

TemporalNetwork planted_network(int n, int L, std::uint64_t seed, double in = 0.7, double out = 0.1) {
  Rng rng(seed);
  std::vector<Label> labels(static_cast<std::size_t>(n * L));
  for (int l = 0; l < L; ++l)
    for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(l * n + i)] = i < n / 2 ? 0 : 1;
  return generate_sbm(CommunityAssignment(n, L, 2, labels), SbmParameters::two_level(L, 2, in, out), rng);
}

double oracle_log_joint(const TemporalNetwork& A, const CommunityAssignment& g, const PriorModel& m) {
  return oracle::log_prior(g, m) + oracle::log_likelihood(A, g);
}

} // namespace

TEST_CASE("full conditionals match brute-force joint ratios") {
  const auto A = planted_network(6, 3, 1);
  const JTable table(6);
  Rng rng(2), mc(3);
  for (const std::string name : {"uniform", "lecs"}) {
    const PriorModel m{parse_prior_kind(name), 6, 3, 3};
    ChainState state(A, m, sample_uniform_assignment(6, 3, 3, rng), &table);
    std::vector<double> w(3);
    for (int trial = 0; trial < 30; ++trial) {
      const int i = static_cast<int>(rng.uniform_int(6));
      const int l = static_cast<int>(rng.uniform_int(3));
      state.full_conditional(i, l, mc, w);
      const auto& g = state.assignment();
      const double base = oracle_log_joint(A, g, m);
      for (Label b = 0; b < 3; ++b) {
        auto h = g;
        h.set(i, l, b);
        CHECK(w[static_cast<std::size_t>(b)] == doctest::Approx(oracle_log_joint(A, h, m) - base).epsilon(1e-9).scale(1.0));
      }
      state.gibbs_update(i, l, rng, mc);
    }
    state.check_consistency();
  }
}

TEST_CASE("Bazzi full conditionals approach the exact integral with many draws") {
  const auto A = planted_network(5, 3, 4);
  Rng rng(5), mc(6);
  const PriorModel m{BazziMarkov{}, 5, 3, 2};
  ChainState state(A, m, sample_uniform_assignment(5, 3, 2, rng), nullptr, MonteCarloBudget{200000});
  std::vector<double> w(2);
  for (const auto [i, l] : {std::pair{0, 0}, std::pair{2, 1}, std::pair{4, 2}}) {
    state.full_conditional(i, l, mc, w);
    const auto& g = state.assignment();
    const double base = oracle_log_joint(A, g, m);
    for (Label b = 0; b < 2; ++b) {
      auto h = g;
      h.set(i, l, b);
      CHECK(w[static_cast<std::size_t>(b)] == doctest::Approx(oracle_log_joint(A, h, m) - base).epsilon(0.02).scale(1.0));
    }
  }
}

TEST_CASE("swap acceptance ratios") {
  const auto A = planted_network(6, 3, 7);
  const JTable table(6);
  Rng rng(8), mc(9);

  SUBCASE("uniform prior accepts every swap") {
    ChainState state(A, PriorModel{UniformAssignments{}, 6, 3, 3}, sample_uniform_assignment(6, 3, 3, rng), &table);
    for (int l0 = 0; l0 < 3; ++l0) CHECK(state.swap_log_acceptance(0, 2, l0, mc) == 0.0);
  }
  SUBCASE("LECS ratio equals the change in the oracle prior") {
    const PriorModel m{Lecs{}, 6, 3, 3};
    ChainState state(A, m, sample_prior(m, rng), &table);
    for (int trial = 0; trial < 20; ++trial) {
      const Label r = static_cast<Label>(rng.uniform_int(3));
      const Label s = static_cast<Label>((r + 1 + rng.uniform_int(2)) % 3);
      const int l0 = static_cast<int>(rng.uniform_int(3));
      auto swapped = state.assignment();
      swapped.swap_labels(r, s, l0);
      CHECK(state.swap_log_acceptance(r, s, l0, mc) ==
            doctest::Approx(oracle_log_joint(A, swapped, m) - oracle_log_joint(A, state.assignment(), m)).epsilon(1e-9).scale(1.0));
      state.multilayer_swap(rng, mc);
      state.check_consistency();
    }
  }
  SUBCASE("LECS, constant-in-time assignment, hand-computed ratio") {
    // Three nodes, two layers, g = (1, 1, 2) in both layers; swap 1 <-> 2 from layer 2.
    const auto A3 = planted_network(3, 2, 10);
    const auto g = CommunityAssignment::from_layers(2, {{0, 0, 1}, {0, 0, 1}});
    const JTable t3(3);
    ChainState state(A3, PriorModel{Lecs{}, 3, 2, 2}, g, &t3);
    // Before: both rows keep everyone, J(0,2) J(0,1). After: every node moves,
    // J(2,2) / C(2,2) and J(1,1) / C(1,1), multinomials 1.
    const double before = std::log(compute_J_digamma(0, 2) * compute_J_digamma(0, 1));
    const double after = std::log(compute_J_digamma(2, 2) * compute_J_digamma(1, 1));
    CHECK(state.swap_log_acceptance(0, 1, 1, mc) == doctest::Approx(after - before).epsilon(1e-10));
  }
  SUBCASE("Bazzi ratio is zero at the first layer") {
    ChainState state(A, PriorModel{BazziMarkov{}, 6, 3, 3}, sample_uniform_assignment(6, 3, 3, rng), nullptr);
    CHECK(state.swap_log_acceptance(0, 1, 0, mc) == 0.0);
  }
}

TEST_CASE("applying a swap twice restores the state") {
  const auto A = planted_network(8, 4, 11);
  const JTable table(8);
  Rng rng(12);
  for (const std::string name : {"uniform", "lecs", "bazzi"}) {
    const PriorModel m{parse_prior_kind(name), 8, 4, 3};
    const auto g = sample_uniform_assignment(8, 4, 3, rng);
    ChainState state(A, m, g, &table);
    const double lik = state.log_likelihood();
    state.apply_swap(0, 2, 2);
    state.check_consistency();
    CHECK(state.log_likelihood() == doctest::Approx(lik).epsilon(1e-12));
    state.apply_swap(0, 2, 2);
    state.check_consistency();
    CHECK(state.assignment() == g);
  }
}

TEST_CASE("chains are reproducible and honour the schedule") {
  const auto A = planted_network(10, 3, 13);
  const JTable table(10);
  SamplerConfig config;
  config.prior = PriorModel{Lecs{}, 10, 3, 2};
  config.sweeps = 50;
  config.burn_in = 10;
  config.thinning = 5;
  config.swap_probability = 0.05;
  config.seed = 77;
  config.consistency_check_interval = 7;
  const auto a = run_chain(A, config, &table);
  const auto b = run_chain(A, config, &table);
  CHECK(a.samples.size() == 8);
  CHECK(a.sample_sweeps.front() == 15);
  CHECK(a.samples == b.samples);
  CHECK(a.diagnostics.log_posterior_trace == b.diagnostics.log_posterior_trace);
  CHECK(a.diagnostics.log_posterior_trace.size() == 50);
  CHECK(a.diagnostics.gibbs_updates + a.diagnostics.swap_proposals == 50 * 30);
  CHECK(a.diagnostics.swap_proposals > 0);

  config.swap_probability = 0.0;
  const auto c = run_chain(A, config, &table);
  CHECK(c.diagnostics.swap_proposals == 0);

  int seen = 0;
  ChainCallbacks callbacks;
  callbacks.on_sample = [&](const CommunityAssignment&, int) { ++seen; };
  int traced = 0;
  callbacks.on_trace = [&](const TraceRecord& t) {
    ++traced;
    CHECK(t.assignment != nullptr);
  };
  const auto d = run_chain(A, config, &table, callbacks);
  CHECK(seen == 8);
  CHECK(traced == 50);
  CHECK(d.samples.empty());
}

TEST_CASE("sampler configuration errors") {
  const auto A = planted_network(6, 2, 14);
  const JTable table(6);
  SamplerConfig config;
  config.prior = PriorModel{YangMarkov{}, 6, 2, 2};
  CHECK_THROWS_AS(run_chain(A, config, &table), std::invalid_argument);
  config.prior = PriorModel{Lecs{}, 6, 2, 2};
  config.swap_probability = 1.5;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.swap_probability = 0.0;
  config.thinning = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.thinning = 1;
  config.prior = PriorModel{Lecs{}, 7, 2, 2};
  CHECK_THROWS_AS(run_chain(A, config, &table), std::invalid_argument);
  config.prior = PriorModel{Lecs{}, 6, 2, 2};
  config.initial = CommunityAssignment(6, 3, 2);
  CHECK_THROWS_AS(run_chain(A, config, &table), std::invalid_argument);
}

TEST_CASE("posterior of a tiny instance is reproduced") {
  const auto A = planted_network(3, 2, 15, 0.8, 0.2);
  const JTable table(3);
  const PriorModel m{Lecs{}, 3, 2, 2};
  const auto exact = oracle::enumerate_posterior(A, m);
  SamplerConfig config;
  config.prior = m;
  config.sweeps = 100000;
  config.burn_in = 100;
  config.thinning = 1;
  config.swap_probability = 0.1;
  config.seed = 5;
  std::vector<double> freq(exact.size(), 0.0);
  ChainCallbacks callbacks;
  callbacks.on_sample = [&](const CommunityAssignment& g, int) { freq[oracle::assignment_index(g)] += 1.0; };
  run_chain(A, config, &table, callbacks);
  for (auto& f : freq) f /= config.sweeps - config.burn_in;
  CHECK(total_variation(freq, exact) < 0.03);
}

TEST_CASE("strong planted structure is recovered") {
  const auto A = planted_network(30, 3, 16, 0.8, 0.05);
  const JTable table = table_for(30);
  SamplerConfig config;
  config.prior = PriorModel{Lecs{}, 30, 3, 2};
  config.sweeps = 40;
  config.seed = 3;
  const auto result = run_chain(A, config, &table);
  std::vector<Label> truth;
  for (int l = 0; l < 3; ++l)
    for (int i = 0; i < 30; ++i) truth.push_back(i < 15 ? 0 : 1);
  CHECK(nmi(result.final_state.labels(), truth) > 0.9);
}
