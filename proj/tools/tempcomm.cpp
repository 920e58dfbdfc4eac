#include "tempcomm/io.hpp"
#include "tempcomm/verification/checks.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>

using namespace tempcomm;
namespace fs = std::filesystem;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 1;
  bool seed_given = false;
  int workers = 1;
  std::string output_dir;
  bool verbose = false;
};

fs::path prepare_output_dir(const Common& common) {
  fs::path dir = common.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

template <class Writer>
void write_text(const fs::path& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  writer(out);
  if (!out) throw UsageError("write failed for '" + path.string() + "'");
}

void log(const Common& common, const std::string& message) {
  if (common.verbose) std::cerr << message << '\n';
}

std::string percent(double ipr) { return io::format_number(100.0 * ipr) + "%"; }

void print_iprs(const std::vector<LocalizationCellResult>& results) {
  for (const auto& r : results) {
    std::cout << r.cell.model.name() << " n=" << r.cell.model.nodes << " L=" << r.cell.model.layers
              << " k=" << r.cell.model.communities << " draws=" << r.cell.draws << '\n';
    for (const auto& h : r.histograms) {
      std::cout << "  " << h.scope;
      if (h.layer >= 0) std::cout << ' ' << h.layer + 1;
      std::cout << ": IPR " << percent(h.ipr);
      if (h.ipr_standard_error > 0) std::cout << " (se " << percent(h.ipr_standard_error) << ')';
      std::cout << '\n';
    }
  }
}

void write_localization_outputs(const fs::path& dir, const std::string& command, const LocalizationPlan& plan,
                                const std::vector<LocalizationCellResult>& results) {
  write_text(dir / "histogram.csv", [&](std::ostream& o) { io::write_histogram_csv(o, results); });
  write_text(dir / "ipr.csv", [&](std::ostream& o) { io::write_ipr_csv(o, results); });
  io::save_json(dir / "results.json", io::localization_results_to_json(results));
  io::save_json(dir / "manifest.json", io::manifest(command, plan.seed, io::localization_plan_to_json(plan),
                                                    {"histogram.csv", "ipr.csv", "results.json"}));
}

// ---------------------------------------------------------------------------

struct SamplePriorArgs {
  std::string model;
  int n = 50;
  int L = 1;
  int k = 2;
  std::int64_t draws = 100000;
  int community = 1;
  int bootstrap = 200;
  std::int64_t chunk = 1000;
  std::string assignments;
};

int sample_prior(const Common& common, const SamplePriorArgs& args) {
  LocalizationPlan plan;
  PriorModel model{parse_prior_kind(args.model), args.n, args.L, args.k};
  model.validate();
  if (args.community < 1 || args.community > args.k) throw UsageError("--community must lie in 1..k");
  plan.cells.push_back({model, args.draws, common.seed});
  plan.seed = common.seed;
  plan.workers = common.workers;
  plan.bootstrap = args.bootstrap;
  plan.chunk = args.chunk;
  plan.community = args.community - 1;
  const fs::path dir = prepare_output_dir(common);
  log(common, "sampling " + std::to_string(args.draws) + " draws of " + model.name());
  const auto results = run_localization_study(plan);
  write_localization_outputs(dir, "sample-prior", plan, results);
  if (!args.assignments.empty()) {
    // Same chunk streams as the study, so these are the draws behind the histogram.
    write_text(args.assignments, [&](std::ostream& o) {
      for (std::int64_t begin = 0, chunk = 0; begin < args.draws; begin += args.chunk, ++chunk) {
        Rng rng = Rng::substream(common.seed, {static_cast<std::uint64_t>(chunk)});
        for (std::int64_t d = begin; d < std::min(args.draws, begin + args.chunk); ++d)
          o << io::assignment_to_json(sample_prior(model, rng)).dump() << '\n';
      }
    });
  }
  print_iprs(results);
  return kOk;
}

struct EvalDensityArgs {
  std::string assignment;
  std::string model;
  int mc_draws = 1000;
};

int eval_density(const Common& common, const EvalDensityArgs& args) {
  const CommunityAssignment g = io::assignment_from_json(io::load_json(args.assignment));
  const PriorModel model{parse_prior_kind(args.model), g.nodes(), g.layers(), g.communities()};
  model.validate();
  const JTable table = table_for(g.nodes());
  Rng mc = Rng::substream(common.seed, {5});
  const MonteCarloBudget budget{args.mc_draws};
  budget.validate();
  const double value = log_prob_assignment(g, model, table, budget, mc).log();
  const fs::path dir = prepare_output_dir(common);
  io::Json config{{"assignment", args.assignment}, {"prior", io::prior_model_to_json(model)}, {"mc_draws", args.mc_draws}};
  io::save_json(dir / "density.json", io::Json{{"log_prob", io::round12(value)}, {"prior", io::prior_model_to_json(model)}});
  io::save_json(dir / "manifest.json", io::manifest("eval-density", common.seed, config, {"density.json"}));
  std::cout << "log P(g) = " << io::format_number(value) << '\n';
  return kOk;
}

struct InferArgs {
  std::string network;
  std::string init;
  std::string prior = "lecs";
  int k = 2;
  int sweeps = 100;
  int burn_in = -1;
  int thinning = 10;
  double swap_probability = 3e-3;
  int mc_draws = 1000;
  int check_interval = -1;
};

int infer(const Common& common, const InferArgs& args) {
  const TemporalNetwork A = io::network_from_json(io::load_json(args.network));
  const PriorKind kind = parse_prior_kind(args.prior);
  if (args.k < 1) throw UsageError("--k must be positive");
  std::optional<CommunityAssignment> initial;
  if (!args.init.empty()) {
    initial = io::assignment_from_json(io::load_json(args.init));
    if (initial->nodes() != A.nodes() || initial->layers() != A.layers() || initial->communities() != args.k)
      throw UsageError("initial assignment dimensions do not match the network and --k");
  }
  const fs::path dir = prepare_output_dir(common);
  io::Json config{{"network", args.network}, {"prior", args.prior}, {"k", args.k}};

  std::ofstream trace(dir / "trace.jsonl");
  if (!trace) throw UsageError("cannot write trace file");

  if (std::holds_alternative<YangMarkov>(kind)) {
    const auto schedule = default_annealing_schedule();
    Rng rng(common.seed);
    const auto result = run_yang_annealing(A, args.k, schedule, rng);
    for (std::size_t s = 0; s < result.log_posterior_trace.size(); ++s)
      trace << io::Json{{"sweep", s + 1}, {"log_posterior", io::round12(result.log_posterior_trace[s])}}.dump() << '\n';
    io::save_json(dir / "estimate.json", io::assignment_to_json(result.estimate));
    config["schedule"] = io::Json::array();
    for (const auto& stage : schedule) config["schedule"].push_back({stage.temperature, stage.sweeps});
    io::save_json(dir / "manifest.json",
                  io::manifest("infer", common.seed, config, {"trace.jsonl", "estimate.json"}));
    std::cout << "annealed estimate written; final log posterior "
              << io::format_number(result.log_posterior_trace.empty() ? 0.0 : result.log_posterior_trace.back()) << '\n';
    return kOk;
  }

  SamplerConfig sampler;
  sampler.prior = PriorModel{kind, A.nodes(), A.layers(), args.k};
  sampler.swap_probability = args.swap_probability;
  sampler.sweeps = args.sweeps;
  sampler.burn_in = args.burn_in;
  sampler.thinning = args.thinning;
  sampler.mc_budget = MonteCarloBudget{args.mc_draws};
  sampler.seed = common.seed;
  sampler.initial = initial;
  if (args.check_interval >= 0) sampler.consistency_check_interval = args.check_interval;
  sampler.validate();
  config["sweeps"] = args.sweeps;
  config["burn_in"] = sampler.effective_burn_in();
  config["thinning"] = args.thinning;
  config["swap_probability"] = args.swap_probability;
  config["mc_draws"] = args.mc_draws;

  std::optional<CommunityAssignment> best;
  double best_log_posterior = -std::numeric_limits<double>::infinity();
  std::ofstream samples(dir / "samples.jsonl");
  if (!samples) throw UsageError("cannot write samples file");
  ChainCallbacks callbacks;
  callbacks.on_sample = [&](const CommunityAssignment& g, int sweep) {
    samples << io::Json{{"sweep", sweep}, {"assignment", io::assignment_to_json(g)}}.dump() << '\n';
  };
  callbacks.on_trace = [&](const TraceRecord& t) {
    trace << io::trace_record(t.sweep, t.log_posterior, *t.assignment).dump() << '\n';
    if (t.sweep > sampler.effective_burn_in() && t.log_posterior > best_log_posterior) {
      best_log_posterior = t.log_posterior;
      best = *t.assignment;
    }
  };
  const JTable table = table_for(A.nodes());
  log(common, "running " + std::to_string(args.sweeps) + " sweeps");
  const ChainResult chain = run_chain(A, sampler, &table, callbacks);
  io::save_json(dir / "estimate.json", io::assignment_to_json(best ? *best : chain.final_state));
  io::save_json(dir / "final.json", io::assignment_to_json(chain.final_state));
  const auto& d = chain.diagnostics;
  io::Json outputs{"trace.jsonl", "samples.jsonl", "estimate.json", "final.json"};
  io::Json manifest = io::manifest("infer", common.seed, config, outputs);
  manifest["diagnostics"] = {{"gibbs_updates", d.gibbs_updates},
                             {"swap_proposals", d.swap_proposals},
                             {"swap_accepts", d.swap_accepts},
                             {"swap_acceptance_rate", io::round12(d.swap_acceptance_rate())}};
  io::save_json(dir / "manifest.json", manifest);
  std::cout << "swap acceptance " << io::format_number(d.swap_acceptance_rate()) << " (" << d.swap_accepts << '/'
            << d.swap_proposals << "), best post-burn-in log posterior " << io::format_number(best_log_posterior)
            << '\n';
  return kOk;
}

struct StudyArgs {
  std::string plan;
  std::string preset;
  int instances = -1;
};

LocalizationPlan preset_localization(const std::string& name) {
  LocalizationPlan plan;
  if (name == "monolayer") {
    for (const int k : {2, 5})
      for (const PriorKind& kind : {PriorKind{UniformAssignments{}}, PriorKind{NodewiseMonolayer{}}})
        plan.cells.push_back({PriorModel{kind, 50, 1, k}, 100000, std::nullopt});
  } else if (name == "temporal") {
    for (const int k : {2, 5})
      for (const PriorKind& kind : {PriorKind{UniformAssignments{}}, PriorKind{YangMarkov{}}, PriorKind{BazziMarkov{}},
                                    PriorKind{Lecs{}}})
        plan.cells.push_back({PriorModel{kind, 50, 5, k}, 100000, std::nullopt});
  } else {
    throw UsageError("unknown preset '" + name + "' (monolayer or temporal)");
  }
  return plan;
}

int localization_study(const Common& common, const StudyArgs& args) {
  if (args.plan.empty() == args.preset.empty()) throw UsageError("give exactly one of --plan and --preset");
  LocalizationPlan plan =
      args.plan.empty() ? preset_localization(args.preset) : io::localization_plan_from_json(io::load_json(args.plan));
  if (common.seed_given || args.plan.empty()) plan.seed = common.seed;
  plan.workers = common.workers;
  const fs::path dir = prepare_output_dir(common);
  log(common, "running " + std::to_string(plan.cells.size()) + " localization cells");
  const auto results = run_localization_study(plan);
  write_localization_outputs(dir, "localization-study", plan, results);
  print_iprs(results);
  return kOk;
}

int recovery_benchmark(const Common& common, const StudyArgs& args) {
  RecoveryPlan plan = args.plan.empty() ? RecoveryPlan::defaults() : io::recovery_plan_from_json(io::load_json(args.plan));
  if (common.seed_given || args.plan.empty()) plan.seed = common.seed;
  if (args.instances > 0) plan.instances = args.instances;
  plan.workers = common.workers;
  plan.validate();
  const fs::path dir = prepare_output_dir(common);
  log(common, "running the recovery benchmark");
  const auto result = run_recovery_benchmark(plan);
  write_text(dir / "records.csv", [&](std::ostream& o) { io::write_recovery_records_csv(o, result); });
  write_text(dir / "summary.csv", [&](std::ostream& o) { io::write_recovery_summary_csv(o, result); });
  write_text(dir / "tests.csv", [&](std::ostream& o) { io::write_recovery_tests_csv(o, result); });
  io::save_json(dir / "results.json", io::recovery_results_to_json(result));
  io::save_json(dir / "manifest.json", io::manifest("recovery-benchmark", plan.seed, io::recovery_plan_to_json(plan),
                                                    {"records.csv", "summary.csv", "tests.csv", "results.json"}));
  for (const auto& s : result.summaries)
    std::cout << "q=" << s.q << " omega=" << io::format_number(s.omega_diagonal) << ' ' << s.method << ": mean NMI "
              << io::format_number(s.mean_nmi) << " (sd " << io::format_number(s.sd_nmi) << ", " << s.instances
              << " instances)\n";
  for (const auto& t : result.tests)
    std::cout << "q=" << t.q << ' ' << t.better << " > " << t.worse << ": p = " << io::format_number(t.p_value) << '\n';
  return kOk;
}

struct SelftestArgs {
  bool quick = false;
  std::string j_cache;
};

int selftest(const Common& common, const SelftestArgs& args) {
  checks::CheckOptions options;
  if (common.seed_given) options.seed = common.seed;
  options.workers = common.workers;
  bool ok = true;
  auto report = [&](const checks::CheckResult& r) {
    std::cout << (r.passed ? "PASS" : "FAIL") << "  [" << r.criterion << "] " << r.name << ": " << r.detail << '\n';
    ok = ok && r.passed;
  };

  JTable cached;
  if (!args.j_cache.empty()) {
    try {
      cached = io::load_or_build_jtable(args.j_cache, 25);
      options.table = &cached;
    } catch (const io::FormatError& e) {
      std::cout << "FAIL  [1] special functions: J table cache rejected: " << e.what() << '\n';
      ok = false;
    }
  }
  if (args.j_cache.empty() || options.table) report(checks::special_functions(options));
  report(checks::prior_normalization(options));
  report(checks::forward_density(options));
  report(checks::statistical_utilities(options));
  if (!args.quick) report(checks::posterior_tiny(options));
  std::cout << (ok ? "selftest passed" : "selftest FAILED") << '\n';
  return ok ? kOk : kCheckFailed;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Community inference in temporal networks: prior sampling, densities, posterior sampling and studies"};
  app.require_subcommand(1);
  Common common;
  if (const char* env = std::getenv("TEMPCOMM_OUTPUT_DIR")) common.output_dir = env;
  if (common.output_dir.empty()) common.output_dir = ".";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "64-bit seed; every output is a function of it")
        ->each([&](const std::string&) { common.seed_given = true; });
    sub->add_option("--workers", common.workers, "worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber);
    sub->add_option("-o,--output-dir", common.output_dir, "output directory (default $TEMPCOMM_OUTPUT_DIR or .)");
    sub->add_flag("-v,--verbose", common.verbose, "progress messages on stderr");
  };

  SamplePriorArgs sp;
  auto* sample_cmd = app.add_subcommand("sample-prior", "draw from a prior; write size histograms and IPRs");
  add_common(sample_cmd);
  sample_cmd->add_option("--model", sp.model, "uniform, nodewise, yang, bazzi, lecs or lecs:<p>")->required();
  sample_cmd->add_option("--n", sp.n, "nodes")->capture_default_str();
  sample_cmd->add_option("--L", sp.L, "layers")->capture_default_str();
  sample_cmd->add_option("--k", sp.k, "communities")->capture_default_str();
  sample_cmd->add_option("--M", sp.draws, "number of draws")->capture_default_str()->check(CLI::PositiveNumber);
  sample_cmd->add_option("--community", sp.community, "tracked community (1-based)")->capture_default_str();
  sample_cmd->add_option("--bootstrap", sp.bootstrap, "bootstrap resamples for the IPR standard error")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sample_cmd->add_option("--chunk", sp.chunk, "draws per seeded chunk")->capture_default_str()->check(CLI::PositiveNumber);
  sample_cmd->add_option("--assignments", sp.assignments, "also write every draw as JSON lines to this file");

  EvalDensityArgs ed;
  auto* density_cmd = app.add_subcommand("eval-density", "log prior probability of an assignment");
  add_common(density_cmd);
  density_cmd->add_option("--assignment", ed.assignment, "assignment JSON")->required()->check(CLI::ExistingFile);
  density_cmd->add_option("--model", ed.model, "uniform, nodewise, bazzi, lecs or lecs:<p>")->required();
  density_cmd->add_option("--mc-draws", ed.mc_draws, "Monte Carlo draws per Bazzi transition")->capture_default_str();

  InferArgs in;
  auto* infer_cmd = app.add_subcommand("infer", "posterior sampling of communities for a network");
  add_common(infer_cmd);
  infer_cmd->add_option("--network", in.network, "network JSON")->required()->check(CLI::ExistingFile);
  infer_cmd->add_option("--k", in.k, "number of communities")->required();
  infer_cmd->add_option("--prior", in.prior, "uniform, bazzi, lecs, lecs:<p>, or yang (annealing)")->capture_default_str();
  infer_cmd->add_option("--init", in.init, "initial assignment JSON (default: a prior draw)")->check(CLI::ExistingFile);
  infer_cmd->add_option("--sweeps", in.sweeps, "sweeps over all node-layers")->capture_default_str();
  infer_cmd->add_option("--burn-in", in.burn_in, "discarded sweeps (default 20% of sweeps)");
  infer_cmd->add_option("--thinning", in.thinning, "keep every t-th sweep")->capture_default_str();
  infer_cmd->add_option("--swap-prob", in.swap_probability, "per-visit multilayer swap probability; 0 disables")
      ->capture_default_str();
  infer_cmd->add_option("--mc-draws", in.mc_draws, "Monte Carlo draws per Bazzi transition")->capture_default_str();
  infer_cmd->add_option("--check-interval", in.check_interval, "recompute caches every N visits (0 = never)");

  StudyArgs ls;
  auto* loc_cmd = app.add_subcommand("localization-study", "community-size histograms and IPR of prior draws");
  add_common(loc_cmd);
  loc_cmd->add_option("--plan", ls.plan, "study plan JSON")->check(CLI::ExistingFile);
  loc_cmd->add_option("--preset", ls.preset, "built-in plan: monolayer or temporal");

  StudyArgs rb;
  auto* rec_cmd = app.add_subcommand("recovery-benchmark", "NMI of recovered communities on planted networks");
  add_common(rec_cmd);
  rec_cmd->add_option("--plan", rb.plan, "benchmark plan JSON (default: built-in plan)")->check(CLI::ExistingFile);
  rec_cmd->add_option("--instances", rb.instances, "override the number of instances");

  SelftestArgs st;
  auto* self_cmd = app.add_subcommand("selftest", "fast correctness checks");
  add_common(self_cmd);
  self_cmd->add_flag("--quick", st.quick, "skip the posterior total-variation test");
  self_cmd->add_option("--j-cache", st.j_cache, "J table cache to validate (built when missing)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sample_cmd) return sample_prior(common, sp);
    if (*density_cmd) return eval_density(common, ed);
    if (*infer_cmd) return infer(common, in);
    if (*loc_cmd) return localization_study(common, ls);
    if (*rec_cmd) return recovery_benchmark(common, rb);
    if (*self_cmd) return selftest(common, st);
  } catch (const InvariantViolation& e) {
    std::cerr << "error: invariant violated: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const io::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
  return kUsage;
}
