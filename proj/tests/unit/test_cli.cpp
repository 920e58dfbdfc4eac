#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string command = env + " \"" TEMPCOMM_CLI_PATH "\" " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buffer[4096];
  while (const std::size_t got = std::fread(buffer, 1, sizeof buffer, pipe)) out.append(buffer, got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("tempcomm_cli_" + std::to_string(std::rand()) + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write_network(const std::string& path) {
  // Two dense groups {1..5} and {6..10}, three layers.
  nlohmann::json layers = nlohmann::json::array();
  for (int l = 0; l < 3; ++l) {
    nlohmann::json edges = nlohmann::json::array();
    for (int i = 1; i <= 10; ++i)
      for (int j = i + 1; j <= 10; ++j)
        if (((i <= 5) == (j <= 5) && (i + j + l) % 4 != 0) || (i + 3 * j + l) % 17 == 0) edges.push_back({i, j});
    layers.push_back(edges);
  }
  std::ofstream(path) << nlohmann::json{{"n", 10}, {"L", 3}, {"layers", layers}}.dump();
}

} // namespace

TEST_CASE("help and usage errors") {
  CHECK(run("--help").code == 0);
  CHECK(run("sample-prior --help").out.find("--model") != std::string::npos);
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("sample-prior --n 5").code == 2);
}

TEST_CASE("sample-prior writes histograms and prints IPR as a percentage") {
  TempDir dir;
  const auto r = run("sample-prior --model uniform --n 50 --L 1 --k 2 --M 100000 --seed 7 -o " + dir / "a");
  REQUIRE(r.code == 0);
  const auto at = r.out.find("IPR ");
  REQUIRE(at != std::string::npos);
  CHECK(std::stod(r.out.substr(at + 4)) == doctest::Approx(7.96).epsilon(0.02));
  CHECK(fs::exists(dir / "a/histogram.csv"));
  CHECK(fs::exists(dir / "a/ipr.csv"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "a/manifest.json"));
  CHECK(manifest["seed"] == 7);
  CHECK(manifest["command"] == "sample-prior");

  // Same seed, any worker count: identical files.
  REQUIRE(run("sample-prior --model uniform --n 50 --L 1 --k 2 --M 100000 --seed 7 --workers 3 -o " + dir / "b").code == 0);
  CHECK(slurp(dir / "a/histogram.csv") == slurp(dir / "b/histogram.csv"));
  CHECK(slurp(dir / "a/ipr.csv") == slurp(dir / "b/ipr.csv"));
}

TEST_CASE("sample-prior edge cases") {
  TempDir dir;
  const auto one = run("sample-prior --model yang --n 10 --L 3 --k 1 --M 50 -o " + dir / "y");
  CHECK(one.code == 0);
  CHECK(one.out.find("IPR 100%") != std::string::npos);
  CHECK(run("sample-prior --model markov --n 10 -o " + dir / "z").code == 2);
  CHECK(run("sample-prior --model nodewise --n 10 --L 3 -o " + dir / "z").code == 2);

  REQUIRE(run("sample-prior --model lecs --n 5 --L 2 --k 2 --M 30 --seed 3 --assignments " + dir / "g.jsonl" + " -o " + dir / "g").code == 0);
  std::ifstream in(dir / "g.jsonl");
  int lines = 0;
  for (std::string line; std::getline(in, line); ++lines) CHECK(nlohmann::json::parse(line)["L"] == 2);
  CHECK(lines == 30);
}

TEST_CASE("output directory defaults to the environment variable") {
  TempDir dir;
  REQUIRE(run("sample-prior --model uniform --n 5 --M 10", "TEMPCOMM_OUTPUT_DIR=" + dir / "env").code == 0);
  CHECK(fs::exists(dir / "env/manifest.json"));
}

TEST_CASE("infer: outputs, swaps off, errors") {
  TempDir dir;
  write_network(dir / "net.json");
  const auto r = run("infer --network " + dir / "net.json" + " --k 2 --prior lecs --sweeps 30 --seed 1 -o " + dir / "i");
  REQUIRE(r.code == 0);
  for (const char* f : {"trace.jsonl", "samples.jsonl", "estimate.json", "final.json", "manifest.json"})
    CHECK(fs::exists(dir / (std::string("i/") + f)));
  const auto estimate = nlohmann::json::parse(slurp(dir / "i/estimate.json"));
  // The two groups are separated in every layer.
  for (int l = 0; l < 3; ++l) {
    const auto first = estimate["labels"][0][l];
    for (int i = 0; i < 10; ++i) CHECK((estimate["labels"][i][l] == first) == (i < 5));
  }

  const auto again = run("infer --network " + dir / "net.json" + " --k 2 --prior lecs --sweeps 30 --seed 1 -o " + dir / "j");
  CHECK(slurp(dir / "i/trace.jsonl") == slurp(dir / "j/trace.jsonl"));

  REQUIRE(run("infer --network " + dir / "net.json" + " --k 2 --prior bazzi --sweeps 3 --swap-prob 0 -o " + dir / "s").code == 0);
  const auto manifest = nlohmann::json::parse(slurp(dir / "s/manifest.json"));
  CHECK(manifest["diagnostics"]["swap_proposals"] == 0);

  REQUIRE(run("infer --network " + dir / "net.json" + " --k 2 --prior yang -o " + dir / "y").code == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "y/manifest.json"))["config"]["schedule"].size() == 10);

  std::ofstream(dir / "bad.json") << "{\"n\": 3, \"L\": 1, \"layers\": [[[1, 4]]]}";
  CHECK(run("infer --network " + dir / "bad.json" + " --k 2 -o " + dir / "x").code == 2);
  std::ofstream(dir / "broken.json") << "{\"n\": 3,";
  CHECK(run("infer --network " + dir / "broken.json" + " --k 2 -o " + dir / "x").code == 2);
  std::ofstream(dir / "init.json") << R"({"n": 4, "L": 3, "k": 2, "labels": [[1,1,1],[1,1,1],[2,2,2],[2,2,2]]})";
  CHECK(run("infer --network " + dir / "net.json" + " --k 2 --init " + dir / "init.json" + " -o " + dir / "x").code == 2);
  CHECK(run("infer --network " + dir / "missing.json" + " --k 2").code == 2);
}

TEST_CASE("eval-density") {
  TempDir dir;
  std::ofstream(dir / "g.json") << R"({"n": 2, "L": 2, "k": 2, "labels": [[1, 1], [2, 2]]})";
  const auto r = run("eval-density --assignment " + dir / "g.json" + " --model uniform -o " + dir / "d");
  REQUIRE(r.code == 0);
  const auto d = nlohmann::json::parse(slurp(dir / "d/density.json"));
  CHECK(d["log_prob"].get<double>() == doctest::Approx(std::log(1.0 / 16)));
  CHECK(run("eval-density --assignment " + dir / "g.json" + " --model yang -o " + dir / "d").code == 2);
}

TEST_CASE("localization-study and recovery-benchmark from plans") {
  TempDir dir;
  std::ofstream(dir / "loc.json") << R"({"seed": 5, "bootstrap": 0, "cells": [{"model": "lecs", "n": 10, "L": 2, "k": 2, "draws": 500}]})";
  const auto l = run("localization-study --plan " + dir / "loc.json" + " -o " + dir / "l");
  REQUIRE(l.code == 0);
  CHECK(l.out.find("overall: IPR") != std::string::npos);
  CHECK(fs::exists(dir / "l/results.json"));
  CHECK(run("localization-study -o " + dir / "l").code == 2);
  std::ofstream(dir / "bad_loc.json") << R"({"cells": [], "seed": 1})";
  CHECK(run("localization-study --plan " + dir / "bad_loc.json" + " -o " + dir / "l").code == 2);

  std::ofstream(dir / "rec.json") << R"({"n": 12, "offsets": [0, -1], "q": [6], "instances": 2, "sweeps": 4,
    "thinning": 2, "mc_draws": 20, "schedule": [[1.0, 2]], "seed": 3})";
  const auto r = run("recovery-benchmark --plan " + dir / "rec.json" + " -o " + dir / "r");
  REQUIRE(r.code == 0);
  for (const char* f : {"records.csv", "summary.csv", "tests.csv", "results.json", "manifest.json"})
    CHECK(fs::exists(dir / (std::string("r/") + f)));
  CHECK(r.out.find("lecs > yang") != std::string::npos);
}

TEST_CASE("selftest reports per check and detects a corrupted J cache") {
  TempDir dir;
  const auto clean = run("selftest --quick --j-cache " + dir / "j.json");
  CHECK(clean.out.find("PASS  [1] special functions") != std::string::npos);
  CHECK(clean.out.find("[3] forward/density consistency") != std::string::npos);
  CHECK(clean.out.find("[7]") == std::string::npos);
  REQUIRE(fs::exists(dir / "j.json"));

  auto j = nlohmann::json::parse(slurp(dir / "j.json"));
  j["values"][40] = j["values"][40].get<double>() * 0.999;
  std::ofstream(dir / "j.json") << j.dump();
  const auto corrupted = run("selftest --quick --j-cache " + dir / "j.json");
  CHECK(corrupted.code == 1);
  CHECK(corrupted.out.find("FAIL  [1] special functions") != std::string::npos);

  j["values"][40] = 7.0;
  std::ofstream(dir / "j.json") << j.dump();
  CHECK(run("selftest --quick --j-cache " + dir / "j.json").code == 1);
}
