#include "helpers.hpp"

#include "tempcomm/experiments.hpp"

#include <doctest.h>

using namespace tempcomm;

TEST_CASE("seeded structure") {
  const auto g = seeded_structure({10, {0, -2, 3}, 5});
  CHECK(g.layers() == 3);
  CHECK(community_sizes(g, 0)[0] == 5);
  CHECK(community_sizes(g, 1)[0] == 3);
  CHECK(community_sizes(g, 2)[0] == 8);
  CHECK(g.at(0, 1) == 0);
  CHECK(g.at(3, 1) == 1);
  CHECK_THROWS_AS(seeded_structure({10, {0, 6}, 5}), std::invalid_argument);
}

TEST_CASE("localization study is independent of the worker count") {
  LocalizationPlan plan;
  plan.seed = 3;
  plan.chunk = 250;
  plan.bootstrap = 20;
  plan.cells = {{PriorModel{Lecs{}, 20, 3, 2}, 2000, std::nullopt},
                {PriorModel{UniformAssignments{}, 20, 1, 3}, 1500, std::nullopt},
                {PriorModel{BazziMarkov{}, 20, 2, 2}, 1000, 99}};
  plan.workers = 1;
  const auto one = run_localization_study(plan);
  plan.workers = 4;
  const auto four = run_localization_study(plan);
  REQUIRE(one.size() == 3);
  CHECK(one[0].seed == localization_cell_seed(3, 0));
  CHECK(one[2].seed == 99);
  CHECK(one[0].histograms.size() == 4);  // three layers and the overall count
  CHECK(one[1].histograms.size() == 1);
  CHECK(one[1].histograms[0].scope == "monolayer");
  CHECK(one[0].histograms.back().scope == "overall");
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t h = 0; h < one[c].histograms.size(); ++h) {
      CHECK(one[c].histograms[h].histogram == four[c].histograms[h].histogram);
      CHECK(one[c].histograms[h].ipr == four[c].histograms[h].ipr);
      CHECK(one[c].histograms[h].ipr_standard_error == four[c].histograms[h].ipr_standard_error);
      CHECK(one[c].histograms[h].histogram.samples() == static_cast<std::uint64_t>(one[c].cell.draws));
    }

  // A cell rerun alone with its recorded seed gives the same histograms.
  LocalizationPlan single = plan;
  single.cells = {one[0].cell};
  single.cells[0].seed = one[0].seed;
  CHECK(run_localization_study(single)[0].histograms[0].histogram == one[0].histograms[0].histogram);

  plan.community = 2;
  CHECK_THROWS_AS(run_localization_study(plan), std::invalid_argument);
}

TEST_CASE("bootstrap standard error is close to the delta-method value") {
  SizeHistogram h(4);
  h.add(0, 300);
  h.add(1, 500);
  h.add(4, 200);
  Rng rng(1);
  const double se = bootstrap_ipr_standard_error(h, 2000, rng);
  // Var of sum p_i^2 estimate: (4/M)(sum p^3 - (sum p^2)^2).
  const double p3 = 0.027 + 0.125 + 0.008;
  const double p2 = 0.09 + 0.25 + 0.04;
  CHECK(se == doctest::Approx(std::sqrt(4.0 / 1000 * (p3 - p2 * p2))).epsilon(0.1));
  CHECK(bootstrap_ipr_standard_error(h, 0, rng) == 0.0);
}

TEST_CASE("recovery methods parse") {
  CHECK(parse_recovery_method("lecs").swaps);
  CHECK_FALSE(parse_recovery_method("bazzi-noswap").swaps);
  CHECK(std::holds_alternative<YangMarkov>(parse_recovery_method("yang").prior));
  CHECK_THROWS_AS(parse_recovery_method("yang-noswap"), std::invalid_argument);
  CHECK_THROWS_AS(parse_recovery_method("nodewise"), std::invalid_argument);
}

TEST_CASE("recovery benchmark: determinism, records and tests") {
  RecoveryPlan plan = RecoveryPlan::defaults();
  plan.nodes = 16;
  plan.q_values = {6, 10};
  plan.offsets = {0, -1, 0};
  plan.instances = 3;
  plan.sweeps = 8;
  plan.thinning = 2;
  plan.mc_budget = MonteCarloBudget{50};
  plan.schedule = {{1.0, 2}, {0.5, 2}};
  plan.seed = 4;
  plan.workers = 1;
  const auto one = run_recovery_benchmark(plan);
  plan.workers = 3;
  const auto three = run_recovery_benchmark(plan);
  REQUIRE(one.records.size() == 2 * 3 * plan.methods.size());
  for (std::size_t i = 0; i < one.records.size(); ++i) {
    CHECK(one.records[i].nmi == three.records[i].nmi);
    CHECK(one.records[i].chain_seed == three.records[i].chain_seed);
    CHECK(one.records[i].nmi >= 0.0);
    CHECK(one.records[i].nmi <= 1.0);
  }
  CHECK(one.summaries.size() == 2 * plan.methods.size());
  CHECK(one.tests.size() == 2 * plan.comparisons.size());

  // Every method sees the same network and chain seed for an instance.
  CHECK(one.records[0].network_seed == one.records[1].network_seed);
  CHECK(one.records[0].chain_seed == recovery_chain_seed(4, one.records[0].q, one.records[0].omega_diagonal, one.records[0].instance));

  const JTable table = table_for(plan.nodes);
  const auto& r = one.records[5];
  const auto again = run_recovery_instance(plan, parse_recovery_method(r.method), r.q, r.omega_diagonal, r.instance, table);
  CHECK(again.nmi == r.nmi);

  RecoveryResult copy;
  copy.records = one.records;
  summarize_recovery(plan, copy);
  for (std::size_t t = 0; t < copy.tests.size(); ++t) CHECK(copy.tests[t].p_value == one.tests[t].p_value);
}

TEST_CASE("recovery plan validation") {
  RecoveryPlan plan = RecoveryPlan::defaults();
  plan.validate();
  plan.q_values = {3};
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
  plan = RecoveryPlan::defaults();
  plan.comparisons.push_back({"lecs", "uniform"});
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
  plan = RecoveryPlan::defaults();
  plan.instances = 0;
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
}
