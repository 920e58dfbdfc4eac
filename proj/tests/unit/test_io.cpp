#include "helpers.hpp"

#include "tempcomm/io.hpp"

#include <doctest.h>

#include <sstream>

using namespace tempcomm;
using io::Json;

TEST_CASE("numbers are written with 12 significant digits") {
  CHECK(io::format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(io::format_number(2.0) == "2");
  CHECK(io::round12(1.0 / 3.0) == 0.333333333333);
}

TEST_CASE("networks round trip with 1-based node ids") {
  const auto j = Json::parse(R"({"n": 3, "L": 2, "layers": [[[1, 2], [3, 2]], []]})");
  const auto A = io::network_from_json(j);
  CHECK(A.adjacent(0, 0, 1));
  CHECK(A.adjacent(0, 2, 1));
  CHECK(A.edge_count(1) == 0);
  CHECK(io::network_from_json(io::network_to_json(A)) == A);

  CHECK_THROWS_AS(io::network_from_json(Json::parse(R"({"n": 3, "L": 1, "layers": [[[0, 1]]]})")), io::FormatError);
  CHECK_THROWS_AS(io::network_from_json(Json::parse(R"({"n": 3, "L": 1, "layers": [[[2, 2]]]})")), io::FormatError);
  CHECK_THROWS_AS(io::network_from_json(Json::parse(R"({"n": 3, "L": 2, "layers": [[]]})")), io::FormatError);
  CHECK_THROWS_AS(io::network_from_json(Json::parse(R"({"n": 3, "L": 1})")), io::FormatError);
  CHECK_THROWS_AS(io::network_from_json(Json::parse(R"({"n": 3, "L": 1, "layers": [[]], "extra": 1})")), io::FormatError);
  CHECK_THROWS_AS(io::network_from_json(Json::parse(R"({"n": "3", "L": 1, "layers": [[]]})")), io::FormatError);
  CHECK_THROWS_AS(io::network_from_json(Json::parse(R"([1, 2])")), io::FormatError);
}

TEST_CASE("assignments round trip with 1-based labels") {
  const auto j = Json::parse(R"({"n": 2, "L": 3, "k": 2, "labels": [[1, 2, 2], [2, 2, 1]]})");
  const auto g = io::assignment_from_json(j);
  CHECK(g.at(0, 0) == 0);
  CHECK(g.at(0, 1) == 1);
  CHECK(g.at(1, 2) == 0);
  CHECK(io::assignment_to_json(g) == j);
  CHECK_THROWS_AS(io::assignment_from_json(Json::parse(R"({"n": 1, "L": 1, "k": 2, "labels": [[0]]})")), io::FormatError);
  CHECK_THROWS_AS(io::assignment_from_json(Json::parse(R"({"n": 1, "L": 1, "k": 2, "labels": [[3]]})")), io::FormatError);
  CHECK_THROWS_AS(io::assignment_from_json(Json::parse(R"({"n": 2, "L": 1, "k": 2, "labels": [[1]]})")), io::FormatError);
  CHECK_THROWS_AS(io::assignment_from_json(Json::parse(R"({"n": 1, "L": 2, "k": 2, "labels": [[1]]})")), io::FormatError);
}

TEST_CASE("J tables round trip and reject corrupted values") {
  const JTable t(12);
  const auto copy = io::jtable_from_json(io::jtable_to_json(t));
  CHECK(copy.n_max() == 12);
  for (int k1 = 0; k1 <= 12; ++k1) CHECK(copy.value(k1, 12) == t.value(k1, 12));
  auto j = io::jtable_to_json(t);
  j["values"][3] = 1.5;
  CHECK_THROWS_AS(io::jtable_from_json(j), io::FormatError);
  j = io::jtable_to_json(t);
  j["values"].erase(0);
  CHECK_THROWS_AS(io::jtable_from_json(j), io::FormatError);
}

TEST_CASE("plans round trip; unknown fields are rejected") {
  LocalizationPlan plan;
  plan.seed = 17;
  plan.bootstrap = 5;
  plan.community = 1;
  plan.cells = {{PriorModel{Lecs{RetentionMode::fixed(0.25)}, 10, 3, 2}, 500, std::nullopt},
                {PriorModel{BazziMarkov{}, 8, 2, 3}, 100, 42}};
  const auto j = io::localization_plan_to_json(plan);
  CHECK(j["community"] == 2);
  const auto back = io::localization_plan_from_json(j);
  CHECK(back.seed == 17);
  CHECK(back.community == 1);
  REQUIRE(back.cells.size() == 2);
  CHECK(back.cells[0].model == plan.cells[0].model);
  CHECK(back.cells[1].seed == std::optional<std::uint64_t>(42));
  CHECK(io::localization_plan_to_json(back) == j);

  auto bad = j;
  bad["cells"][0]["colour"] = "red";
  CHECK_THROWS_AS(io::localization_plan_from_json(bad), io::FormatError);
  bad = j;
  bad["cells"][0]["model"] = "nodewise";
  CHECK_THROWS_AS(io::localization_plan_from_json(bad), io::FormatError);

  RecoveryPlan rp = RecoveryPlan::defaults();
  rp.instances = 7;
  rp.q_values = {60, 70};
  rp.schedule = {{1.0, 3}, {0.5, 2}};
  const auto rj = io::recovery_plan_to_json(rp);
  const auto rback = io::recovery_plan_from_json(rj);
  CHECK(rback.instances == 7);
  CHECK(rback.q_values == rp.q_values);
  CHECK(rback.methods.size() == rp.methods.size());
  CHECK(rback.comparisons.size() == rp.comparisons.size());
  CHECK(rback.schedule.size() == 2);
  CHECK(io::recovery_plan_to_json(rback) == rj);
  auto rbad = rj;
  rbad["sweepz"] = 4;
  CHECK_THROWS_AS(io::recovery_plan_from_json(rbad), io::FormatError);
}

TEST_CASE("manifests carry tool, version, seed and a stable config hash") {
  const Json config{{"a", 1}, {"b", "x"}};
  const auto m = io::manifest("infer", 9, config, {"out.json"});
  CHECK(m["tool"] == "tempcomm");
  CHECK(m["version"] == io::kToolVersion);
  CHECK(m["seed"] == 9);
  CHECK(m["config_hash"].get<std::string>().size() == 16);
  CHECK(io::config_hash(config) == io::config_hash(Json{{"a", 1}, {"b", "x"}}));
  CHECK(io::config_hash(config) != io::config_hash(Json{{"a", 2}, {"b", "x"}}));
}

TEST_CASE("CSV outputs have the documented columns") {
  LocalizationPlan plan;
  plan.seed = 1;
  plan.bootstrap = 0;
  plan.cells = {{PriorModel{UniformAssignments{}, 4, 2, 2}, 50, std::nullopt}};
  const auto results = run_localization_study(plan);
  std::ostringstream hist, ipr;
  io::write_histogram_csv(hist, results);
  io::write_ipr_csv(ipr, results);
  CHECK(hist.str().rfind("model,n,L,k,draws,seed,scope,layer,size,count,frequency\n", 0) == 0);
  CHECK(ipr.str().rfind("model,n,L,k,draws,seed,scope,layer,statistic,value\n", 0) == 0);
  // Two layers (sizes 0..4) and the overall count (0..8).
  std::size_t lines = 0;
  for (const char c : hist.str()) lines += c == '\n';
  CHECK(lines == 1 + 5 + 5 + 9);
  CHECK(hist.str().find("uniform,4,2,2,50," + std::to_string(results[0].seed) + ",layer,2,") != std::string::npos);
}
