#pragma once

// Study drivers: prior localization (size histograms and IPR of prior draws)
// and community recovery on networks with planted two-community structure.

#include "tempcomm/analysis.hpp"
#include "tempcomm/prior_density.hpp"
#include "tempcomm/priors.hpp"
#include "tempcomm/sampler.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tempcomm {

/// Two communities; nodes 0..q+offset_l-1 of layer l carry label 0, the rest
/// label 1.
struct SeededStructureSpec {
  int nodes = 100;
  std::vector<int> offsets = {0, -5, -10, -5, 0};
  int q = 50;

  int layers() const { return static_cast<int>(offsets.size()); }
  /// Throws std::invalid_argument unless 0 <= q + offset_l <= n for every l.
  void validate() const;
};

CommunityAssignment seeded_structure(const SeededStructureSpec& spec);

// ---------------------------------------------------------------------------
// Localization study.

struct LocalizationCell {
  PriorModel model;
  std::int64_t draws = 100000;
  /// Derived from the plan seed and cell index when absent.
  std::optional<std::uint64_t> seed;
};

struct LocalizationPlan {
  std::vector<LocalizationCell> cells;
  std::uint64_t seed = 1;
  int workers = 1;
  /// Bootstrap resamples for the IPR standard error (0 disables).
  int bootstrap = 200;
  /// Draws per independently seeded chunk.
  std::int64_t chunk = 1000;
  /// Community whose size is tracked (0-based).
  Label community = 0;
};

struct HistogramSummary {
  /// "monolayer", "layer" or "overall".
  std::string scope;
  /// 0-based layer for scope "layer", else -1.
  int layer = -1;
  SizeHistogram histogram;
  double ipr = 0.0;
  double ipr_standard_error = 0.0;
};

struct LocalizationCellResult {
  LocalizationCell cell;
  std::uint64_t seed = 0;
  std::vector<HistogramSummary> histograms;
};

/// Seed used for cell `index` when the cell does not fix one.
std::uint64_t localization_cell_seed(std::uint64_t plan_seed, std::size_t index);

/// Standard error of the IPR of h from `resamples` multinomial resamples.
double bootstrap_ipr_standard_error(const SizeHistogram& h, int resamples, Rng& rng);

/// Monolayer cells report the single histogram; temporal cells report every
/// layer and the overall count.
std::vector<LocalizationCellResult> run_localization_study(const LocalizationPlan& plan);

// ---------------------------------------------------------------------------
// Recovery benchmark.

struct RecoveryMethod {
  std::string name;
  /// Prior used by the sampler; YangMarkov selects annealing.
  PriorKind prior;
  bool swaps = true;
};

/// "lecs", "lecs-noswap", "bazzi", "bazzi-noswap", "uniform",
/// "uniform-noswap" or "yang".
RecoveryMethod parse_recovery_method(const std::string& name);

struct RecoveryComparison {
  std::string better;
  std::string worse;
};

struct RecoveryPlan {
  int nodes = 100;
  std::vector<int> offsets = {0, -5, -10, -5, 0};
  std::vector<int> q_values = {50, 60, 70, 80, 90};
  std::vector<double> omega_diagonals = {0.25};
  double omega_off_diagonal = 0.1;
  int instances = 100;
  std::vector<RecoveryMethod> methods;
  std::vector<RecoveryComparison> comparisons;
  int sweeps = 100;
  int burn_in = -1;
  int thinning = 10;
  double swap_probability = 3e-3;
  MonteCarloBudget mc_budget;
  AnnealingSchedule schedule = default_annealing_schedule();
  std::uint64_t seed = 1;
  int workers = 1;

  /// LECS, Bazzi (each with and without swaps) and the annealed baseline,
  /// with the swap, LECS-vs-Bazzi and LECS-vs-baseline comparisons.
  static RecoveryPlan defaults();
  void validate() const;
};

struct RecoveryRecord {
  int q = 0;
  double omega_diagonal = 0.0;
  int instance = 0;
  std::string method;
  std::uint64_t network_seed = 0;
  std::uint64_t chain_seed = 0;
  /// Mean NMI over retained samples (annealing: NMI of the final estimate).
  double nmi = 0.0;
  /// Best-permutation agreement of the final state, as a fraction.
  double correct_fraction = 0.0;
  int samples = 0;
  double swap_acceptance = 0.0;
};

struct RecoverySummary {
  int q = 0;
  double omega_diagonal = 0.0;
  std::string method;
  double mean_nmi = 0.0;
  double sd_nmi = 0.0;
  int instances = 0;
};

struct RecoveryTest {
  int q = 0;
  double omega_diagonal = 0.0;
  std::string better;
  std::string worse;
  double mean_better = 0.0;
  double mean_worse = 0.0;
  double p_value = 1.0;
};

struct RecoveryResult {
  std::vector<RecoveryRecord> records;
  std::vector<RecoverySummary> summaries;
  std::vector<RecoveryTest> tests;
};

/// Seeds of one benchmark instance; every method sees the same network and
/// chain seed.
std::uint64_t recovery_network_seed(std::uint64_t plan_seed, int q, double omega_diagonal, int instance);
std::uint64_t recovery_chain_seed(std::uint64_t plan_seed, int q, double omega_diagonal, int instance);

/// Runs one method on one instance.
RecoveryRecord run_recovery_instance(const RecoveryPlan& plan, const RecoveryMethod& method, int q,
                                     double omega_diagonal, int instance, const JTable& table);

RecoveryResult run_recovery_benchmark(const RecoveryPlan& plan);

/// Recomputes summaries and Mann-Whitney tests from records.
void summarize_recovery(const RecoveryPlan& plan, RecoveryResult& result);

} // namespace tempcomm
