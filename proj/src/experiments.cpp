#include "tempcomm/experiments.hpp"

#include "tempcomm/likelihood.hpp"
#include "tempcomm/parallel.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <random>

namespace tempcomm {

void SeededStructureSpec::validate() const {
  if (nodes < 1) throw std::invalid_argument("seeded structure: n must be positive");
  if (offsets.empty()) throw std::invalid_argument("seeded structure: need at least one layer offset");
  for (const int offset : offsets)
    if (q + offset < 0 || q + offset > nodes)
      throw std::invalid_argument("seeded structure: q + offset = " + std::to_string(q + offset) + " outside [0, n]");
}

CommunityAssignment seeded_structure(const SeededStructureSpec& spec) {
  spec.validate();
  std::vector<Label> labels;
  labels.reserve(static_cast<std::size_t>(spec.nodes) * spec.offsets.size());
  for (const int offset : spec.offsets)
    for (int i = 0; i < spec.nodes; ++i) labels.push_back(i < spec.q + offset ? 0 : 1);
  return CommunityAssignment(spec.nodes, spec.layers(), 2, std::move(labels));
}

// ---------------------------------------------------------------------------

std::uint64_t localization_cell_seed(std::uint64_t plan_seed, std::size_t index) {
  return Rng::substream(plan_seed, {0x10ca1, index}).next();
}

double bootstrap_ipr_standard_error(const SizeHistogram& h, int resamples, Rng& rng) {
  if (resamples < 2 || h.samples() == 0) return 0.0;
  const auto freq = h.frequencies();
  const auto total = static_cast<std::int64_t>(h.samples());
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    // Multinomial resample as a chain of conditional binomials.
    std::int64_t left = total;
    double mass = 1.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < freq.size() && left > 0; ++i) {
      if (freq[i] <= 0.0) continue;
      const double share = std::min(1.0, freq[i] / mass);
      std::binomial_distribution<std::int64_t> binomial(left, share);
      const std::int64_t c = i + 1 == freq.size() ? left : binomial(rng);
      mass -= freq[i];
      left -= c;
      const double f = static_cast<double>(c) / static_cast<double>(total);
      sum_sq += f * f;
    }
    values.push_back(sum_sq);
  }
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (const double v : values) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(values.size() - 1));
}

namespace {

std::vector<HistogramMode> modes_for(const PriorModel& model) {
  if (model.layers == 1) return {HistogramMode::monolayer()};
  std::vector<HistogramMode> modes;
  for (int l = 0; l < model.layers; ++l) modes.push_back(HistogramMode::per_layer(l));
  modes.push_back(HistogramMode::overall());
  return modes;
}

std::vector<SizeHistogram> empty_histograms(const PriorModel& model, const std::vector<HistogramMode>& modes) {
  std::vector<SizeHistogram> out;
  for (const auto& mode : modes) out.emplace_back(histogram_support_max(mode, model.nodes, model.layers));
  return out;
}

} // namespace

std::vector<LocalizationCellResult> run_localization_study(const LocalizationPlan& plan) {
  if (plan.chunk < 1) throw std::invalid_argument("localization plan: chunk must be positive");
  struct Task {
    std::size_t cell;
    std::int64_t chunk;
    std::int64_t begin;
    std::int64_t end;
  };
  std::vector<Task> tasks;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<HistogramMode>> modes;
  for (std::size_t c = 0; c < plan.cells.size(); ++c) {
    const auto& cell = plan.cells[c];
    cell.model.validate();
    if (cell.draws < 1) throw std::invalid_argument("localization plan: draws must be positive");
    if (plan.community >= cell.model.communities)
      throw std::invalid_argument("localization plan: tracked community outside [k]");
    seeds.push_back(cell.seed ? *cell.seed : localization_cell_seed(plan.seed, c));
    modes.push_back(modes_for(cell.model));
    for (std::int64_t begin = 0, chunk = 0; begin < cell.draws; begin += plan.chunk, ++chunk)
      tasks.push_back({c, chunk, begin, std::min(cell.draws, begin + plan.chunk)});
  }

  std::vector<std::vector<SizeHistogram>> partial(tasks.size());
  parallel_for(tasks.size(), plan.workers, [&](std::size_t t) {
    const auto& task = tasks[t];
    const auto& model = plan.cells[task.cell].model;
    const auto& cell_modes = modes[task.cell];
    auto hist = empty_histograms(model, cell_modes);
    Rng rng = Rng::substream(seeds[task.cell], {static_cast<std::uint64_t>(task.chunk)});
    for (std::int64_t d = task.begin; d < task.end; ++d) {
      const CommunityAssignment g = sample_prior(model, rng);
      for (std::size_t m = 0; m < cell_modes.size(); ++m) accumulate_size(hist[m], g, cell_modes[m], plan.community);
    }
    partial[t] = std::move(hist);
  });

  std::vector<LocalizationCellResult> results;
  for (std::size_t c = 0; c < plan.cells.size(); ++c) {
    auto merged = empty_histograms(plan.cells[c].model, modes[c]);
    for (std::size_t t = 0; t < tasks.size(); ++t)
      if (tasks[t].cell == c)
        for (std::size_t m = 0; m < merged.size(); ++m) merged[m].merge(partial[t][m]);
    LocalizationCellResult result{plan.cells[c], seeds[c], {}};
    for (std::size_t m = 0; m < merged.size(); ++m) {
      HistogramSummary summary;
      const auto mode = modes[c][m];
      summary.scope = mode.kind() == HistogramMode::Kind::Monolayer ? "monolayer"
                      : mode.kind() == HistogramMode::Kind::PerLayer ? "layer"
                                                                      : "overall";
      summary.layer = mode.kind() == HistogramMode::Kind::PerLayer ? mode.layer() : -1;
      summary.ipr = ipr(merged[m]);
      Rng boot = Rng::substream(seeds[c], {0xb007, m});
      summary.ipr_standard_error = bootstrap_ipr_standard_error(merged[m], plan.bootstrap, boot);
      summary.histogram = std::move(merged[m]);
      result.histograms.push_back(std::move(summary));
    }
    results.push_back(std::move(result));
  }
  return results;
}

// ---------------------------------------------------------------------------

RecoveryMethod parse_recovery_method(const std::string& name) {
  const std::string suffix = "-noswap";
  const bool no_swap = name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  const std::string base = no_swap ? name.substr(0, name.size() - suffix.size()) : name;
  if (base == "lecs") return {name, Lecs{}, !no_swap};
  if (base == "bazzi") return {name, BazziMarkov{}, !no_swap};
  if (base == "uniform") return {name, UniformAssignments{}, !no_swap};
  if (base == "yang" && !no_swap) return {name, YangMarkov{}, false};
  throw std::invalid_argument("unknown recovery method '" + name + "'");
}

RecoveryPlan RecoveryPlan::defaults() {
  RecoveryPlan plan;
  for (const char* name : {"lecs", "lecs-noswap", "bazzi", "bazzi-noswap", "yang"})
    plan.methods.push_back(parse_recovery_method(name));
  plan.comparisons = {{"lecs", "lecs-noswap"}, {"bazzi", "bazzi-noswap"}, {"lecs", "bazzi"}, {"lecs", "yang"}};
  return plan;
}

void RecoveryPlan::validate() const {
  if (instances < 1) throw std::invalid_argument("recovery plan: instances must be positive");
  if (methods.empty()) throw std::invalid_argument("recovery plan: no methods");
  if (q_values.empty() || omega_diagonals.empty()) throw std::invalid_argument("recovery plan: empty grid");
  for (const int q : q_values) SeededStructureSpec{nodes, offsets, q}.validate();
  for (const double w : omega_diagonals)
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("recovery plan: omega outside [0, 1]");
  if (!(omega_off_diagonal >= 0.0 && omega_off_diagonal <= 1.0))
    throw std::invalid_argument("recovery plan: omega outside [0, 1]");
  for (const auto& c : comparisons) {
    auto known = [this](const std::string& n) {
      return std::any_of(methods.begin(), methods.end(), [&n](const RecoveryMethod& m) { return m.name == n; });
    };
    if (!known(c.better) || !known(c.worse))
      throw std::invalid_argument("recovery plan: comparison names an unknown method");
  }
  validate_schedule(schedule);
  mc_budget.validate();
}

std::uint64_t recovery_network_seed(std::uint64_t plan_seed, int q, double omega_diagonal, int instance) {
  return Rng::substream(plan_seed, {0x5eed1, static_cast<std::uint64_t>(q), std::bit_cast<std::uint64_t>(omega_diagonal),
                                    static_cast<std::uint64_t>(instance)})
      .next();
}

std::uint64_t recovery_chain_seed(std::uint64_t plan_seed, int q, double omega_diagonal, int instance) {
  return Rng::substream(plan_seed, {0x5eed2, static_cast<std::uint64_t>(q), std::bit_cast<std::uint64_t>(omega_diagonal),
                                    static_cast<std::uint64_t>(instance)})
      .next();
}

RecoveryRecord run_recovery_instance(const RecoveryPlan& plan, const RecoveryMethod& method, int q,
                                     double omega_diagonal, int instance, const JTable& table) {
  const SeededStructureSpec spec{plan.nodes, plan.offsets, q};
  const CommunityAssignment truth = seeded_structure(spec);
  const int L = spec.layers();
  const auto params = SbmParameters::two_level(L, 2, omega_diagonal, plan.omega_off_diagonal);

  RecoveryRecord record;
  record.q = q;
  record.omega_diagonal = omega_diagonal;
  record.instance = instance;
  record.method = method.name;
  record.network_seed = recovery_network_seed(plan.seed, q, omega_diagonal, instance);
  record.chain_seed = recovery_chain_seed(plan.seed, q, omega_diagonal, instance);

  Rng network_rng(record.network_seed);
  const TemporalNetwork A = generate_sbm(truth, params, network_rng);
  const double total = static_cast<double>(plan.nodes) * L;

  if (std::holds_alternative<YangMarkov>(method.prior)) {
    Rng rng(record.chain_seed);
    const auto annealed = run_yang_annealing(A, 2, plan.schedule, rng);
    record.nmi = nmi(annealed.estimate, truth);
    record.samples = 1;
    record.correct_fraction = static_cast<double>(best_permutation_agreement(annealed.estimate, truth)) / total;
    return record;
  }

  SamplerConfig config;
  config.prior = PriorModel{method.prior, plan.nodes, L, 2};
  config.swap_probability = method.swaps ? plan.swap_probability : 0.0;
  config.sweeps = plan.sweeps;
  config.burn_in = plan.burn_in;
  config.thinning = plan.thinning;
  config.mc_budget = plan.mc_budget;
  config.seed = record.chain_seed;

  double nmi_sum = 0.0;
  int samples = 0;
  ChainCallbacks callbacks;
  callbacks.on_sample = [&](const CommunityAssignment& g, int) {
    nmi_sum += nmi(g, truth);
    ++samples;
  };
  const ChainResult chain = run_chain(A, config, &table, callbacks);
  if (samples == 0) {
    nmi_sum = nmi(chain.final_state, truth);
    samples = 1;
  }
  record.nmi = nmi_sum / samples;
  record.samples = samples;
  record.correct_fraction = static_cast<double>(best_permutation_agreement(chain.final_state, truth)) / total;
  record.swap_acceptance = chain.diagnostics.swap_acceptance_rate();
  return record;
}

void summarize_recovery(const RecoveryPlan& plan, RecoveryResult& result) {
  result.summaries.clear();
  result.tests.clear();
  std::map<std::tuple<int, double, std::string>, std::vector<double>> groups;
  for (const auto& r : result.records) groups[{r.q, r.omega_diagonal, r.method}].push_back(r.nmi);
  for (const double w : plan.omega_diagonals)
    for (const int q : plan.q_values) {
      for (const auto& m : plan.methods) {
        const auto it = groups.find({q, w, m.name});
        if (it == groups.end()) continue;
        const auto& v = it->second;
        double mean = 0.0;
        for (const double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (const double x : v) var += (x - mean) * (x - mean);
        const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
        result.summaries.push_back({q, w, m.name, mean, sd, static_cast<int>(v.size())});
      }
      for (const auto& c : plan.comparisons) {
        const auto a = groups.find({q, w, c.better});
        const auto b = groups.find({q, w, c.worse});
        if (a == groups.end() || b == groups.end()) continue;
        const auto test = mann_whitney_one_sided(a->second, b->second);
        auto mean = [](const std::vector<double>& v) {
          double s = 0.0;
          for (const double x : v) s += x;
          return s / static_cast<double>(v.size());
        };
        result.tests.push_back({q, w, c.better, c.worse, mean(a->second), mean(b->second), test.p_value});
      }
    }
}

RecoveryResult run_recovery_benchmark(const RecoveryPlan& plan) {
  plan.validate();
  const JTable table = table_for(plan.nodes);
  struct Task {
    int q;
    double omega;
    int instance;
    std::size_t method;
  };
  std::vector<Task> tasks;
  for (const double w : plan.omega_diagonals)
    for (const int q : plan.q_values)
      for (int inst = 0; inst < plan.instances; ++inst)
        for (std::size_t m = 0; m < plan.methods.size(); ++m) tasks.push_back({q, w, inst, m});

  RecoveryResult result;
  result.records.resize(tasks.size());
  parallel_for(tasks.size(), plan.workers, [&](std::size_t t) {
    const auto& task = tasks[t];
    result.records[t] = run_recovery_instance(plan, plan.methods[task.method], task.q, task.omega, task.instance, table);
  });
  summarize_recovery(plan, result);
  return result;
}

} // namespace tempcomm
