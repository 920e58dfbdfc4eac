#include "helpers.hpp"

#include "tempcomm/analysis.hpp"
#include "tempcomm/sampler.hpp"
#include "tempcomm/verification/oracles.hpp"

#include <doctest.h>

using namespace tempcomm;

namespace {

// Shared-kernel prior and one SBM matrix for all layers, both integrated out,
// counted directly from node pairs and node transitions.
double yang_log_joint(const TemporalNetwork& A, const CommunityAssignment& g) {
  const int k = g.communities();
  const auto K = static_cast<std::size_t>(k);
  double total = oracle::first_layer_log(g.layer(0), k);
  std::vector<double> pooled(K * K, 0.0);
  for (int l = 1; l < g.layers(); ++l)
    for (int i = 0; i < g.nodes(); ++i)
      pooled[static_cast<std::size_t>(g.at(i, l - 1)) * K + static_cast<std::size_t>(g.at(i, l))] += 1;
  for (std::size_t r = 0; r < K; ++r) {
    double n = 0.0;
    total += std::lgamma(k);
    for (std::size_t s = 0; s < K; ++s) {
      total += std::lgamma(pooled[r * K + s] + 1.0);
      n += pooled[r * K + s];
    }
    total -= std::lgamma(n + k);
  }
  std::vector<double> m(K * K, 0.0), t(K * K, 0.0);
  for (int l = 0; l < g.layers(); ++l)
    for (int i = 0; i < g.nodes(); ++i)
      for (int j = i + 1; j < g.nodes(); ++j) {
        auto r = static_cast<std::size_t>(g.at(i, l));
        auto s = static_cast<std::size_t>(g.at(j, l));
        if (r > s) std::swap(r, s);
        t[r * K + s] += 1;
        m[r * K + s] += A.adjacent(l, i, j);
      }
  for (std::size_t r = 0; r < K; ++r)
    for (std::size_t s = r; s < K; ++s)
      total += std::lgamma(m[r * K + s] + 1) + std::lgamma(t[r * K + s] - m[r * K + s] + 1) - std::lgamma(t[r * K + s] + 2);
  return total;
}

TemporalNetwork planted(int n, int L, std::uint64_t seed, double in, double out) {
  Rng rng(seed);
  std::vector<Label> labels;
  for (int l = 0; l < L; ++l)
    for (int i = 0; i < n; ++i) labels.push_back(i < n / 2 ? 0 : 1);
  return generate_sbm(CommunityAssignment(n, L, 2, labels), SbmParameters::two_level(L, 2, in, out), rng);
}

} // namespace

TEST_CASE("default annealing schedule") {
  const auto s = default_annealing_schedule();
  REQUIRE(s.size() == 10);
  CHECK(s[0].temperature == 1.0);
  CHECK(s[0].sweeps == 20);
  for (std::size_t i = 1; i <= 6; ++i) {
    CHECK(s[i].temperature == doctest::Approx(1.0 - 0.1 * static_cast<double>(i)));
    CHECK(s[i].sweeps == 10);
  }
  for (std::size_t i = 7; i < 10; ++i) CHECK(s[i].sweeps == 5);
  CHECK(s.back().temperature == doctest::Approx(0.1));
  CHECK_THROWS_AS(validate_schedule({{0.0, 5}}), std::invalid_argument);
  CHECK_THROWS_AS(validate_schedule({{0.5, 1}, {1.0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(validate_schedule({}), std::invalid_argument);
}

TEST_CASE("Yang joint density and conditionals against direct counting") {
  const auto A = planted(7, 3, 1, 0.6, 0.2);
  Rng rng(2);
  YangState state(A, sample_uniform_assignment(7, 3, 3, rng));
  std::vector<double> w(3);
  for (int trial = 0; trial < 40; ++trial) {
    const auto& g = state.assignment();
    const double base = yang_log_joint(A, g);
    CHECK(state.log_posterior() == doctest::Approx(base).epsilon(1e-10));
    const int i = static_cast<int>(rng.uniform_int(7));
    const int l = static_cast<int>(rng.uniform_int(3));
    state.full_conditional(i, l, w);
    for (Label b = 0; b < 3; ++b) {
      auto h = g;
      h.set(i, l, b);
      CHECK(w[static_cast<std::size_t>(b)] == doctest::Approx(yang_log_joint(A, h) - base).epsilon(1e-9).scale(1.0));
    }
    state.gibbs_update(i, l, 0.5, rng);
  }
  state.check_consistency();
}

TEST_CASE("annealing is reproducible and climbs the posterior") {
  const auto A = planted(30, 4, 3, 0.8, 0.05);
  Rng a(4), b(4);
  const auto first = run_yang_annealing(A, 2, default_annealing_schedule(), a);
  const auto second = run_yang_annealing(A, 2, default_annealing_schedule(), b);
  CHECK(first.estimate == second.estimate);
  CHECK(first.log_posterior_trace == second.log_posterior_trace);
  CHECK(first.log_posterior_trace.size() == 95);
  CHECK(first.log_posterior_trace.back() > first.log_posterior_trace.front() + 100);
  CHECK(YangState(A, first.estimate).log_posterior() == doctest::Approx(first.log_posterior_trace.back()).epsilon(1e-10));
  // Single-site moves from a prior draw can leave whole layers merged or
  // relabelled, so only the layers that did split are compared.
  std::vector<Label> truth(30);
  for (int i = 0; i < 30; ++i) truth[static_cast<std::size_t>(i)] = i < 15 ? 0 : 1;
  int recovered = 0;
  for (int l = 0; l < 4; ++l) recovered += nmi(first.estimate.layer(l), truth) > 0.99;
  CHECK(recovered >= 1);
}

TEST_CASE("annealing with one community is trivial") {
  const auto A = planted(6, 2, 5, 0.5, 0.5);
  Rng rng(6);
  const auto r = run_yang_annealing(A, 1, {{1.0, 2}}, rng);
  for (const Label x : r.estimate.labels()) CHECK(x == 0);
}
