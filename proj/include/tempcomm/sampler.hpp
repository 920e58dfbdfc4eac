#pragma once

// Posterior sampling of community assignments given a temporal network:
// node-major Gibbs sweeps interleaved with multilayer label swaps, and the
// annealed Gibbs baseline with a shared Markov kernel and shared SBM.

#include "tempcomm/likelihood.hpp"
#include "tempcomm/prior_density.hpp"
#include "tempcomm/priors.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace tempcomm {

struct SamplerConfig {
  PriorModel prior;
  double swap_probability = 3e-3;
  int sweeps = 100;
  /// Negative means 20% of sweeps.
  int burn_in = -1;
  int thinning = 10;
  MonteCarloBudget mc_budget;
  std::uint64_t seed = 0;
  /// Recompute every cache from scratch after this many visits (0 = never).
#ifdef NDEBUG
  int consistency_check_interval = 0;
#else
  int consistency_check_interval = 1000;
#endif
  /// Start here instead of a fresh prior draw.
  std::optional<CommunityAssignment> initial;

  int effective_burn_in() const { return burn_in < 0 ? sweeps / 5 : burn_in; }
  void validate() const;
};

/// Current assignment of one chain plus every cache the updates rely on:
/// block counts, per-boundary transition counts and, for LECS, per-boundary
/// transition log-terms.
class ChainState {
public:
  /// `table` may be null unless the prior is LECS with random retention.
  ChainState(const TemporalNetwork& A, const PriorModel& prior, CommunityAssignment initial, const JTable* table,
             MonteCarloBudget budget = {});

  const CommunityAssignment& assignment() const { return g_; }
  const LikelihoodState& likelihood() const { return likelihood_; }
  const PriorModel& prior() const { return prior_; }
  /// Transition counts between layers l-1 and l (1 <= l < L).
  const CountMatrix& boundary_counts(int l) const { return transitions_[static_cast<std::size_t>(l)]; }

  double log_likelihood() const { return likelihood_.log_likelihood(); }
  /// Exact log prior for uniform and LECS; Bazzi uses a fresh Monte Carlo
  /// estimate per boundary drawn from `mc`.
  double log_prior(Rng& mc) const;
  double log_posterior(Rng& mc) const { return log_likelihood() + log_prior(mc); }

  /// Unnormalised log full conditional of node-layer (i, l) over all k
  /// labels, relative to the current label. Bazzi terms share one fresh set
  /// of draws across the candidates of each affected boundary.
  void full_conditional(int i, int l, Rng& mc, std::span<double> log_weights);

  /// Resamples g(i, l) from its full conditional; returns the new label.
  Label gibbs_update(int i, int l, Rng& rng, Rng& mc);

  /// log of P(A, g*) / P(A, g) for exchanging r and s in layers >= l0.
  double swap_log_acceptance(Label r, Label s, int l0, Rng& mc);
  void apply_swap(Label r, Label s, int l0);

  struct SwapOutcome {
    Label r = 0;
    Label s = 0;
    int first_layer = 0;
    bool accepted = false;
  };
  /// Proposes r != s uniformly and l0 uniformly over the layers; accepts
  /// with probability min(1, ratio). Requires k >= 2.
  SwapOutcome multilayer_swap(Rng& rng, Rng& mc);

  /// Rebuilds every cache from g and throws InvariantViolation on mismatch.
  void check_consistency() const;

private:
  void update_caches_after_move(int i, int l, Label a, Label b, std::span<const std::int64_t> e, double delta_lik);
  double lecs_boundary_log(int l) const;
  double bazzi_swap_log_ratio(int l0, Label r, Label s, Rng& mc);

  const TemporalNetwork* A_;
  PriorModel prior_;
  const JTable* table_;
  MonteCarloBudget budget_;
  CommunityAssignment g_;
  LikelihoodState likelihood_;
  LogFactorials lf_;
  std::optional<LecsTransition> lecs_;
  bool bazzi_ = false;
  bool uniform_ = false;
  std::vector<CountMatrix> transitions_;
  std::vector<double> lecs_boundary_logs_;

  // Per-visit buffers.
  std::vector<std::int64_t> e_;
  std::vector<double> lik_delta_;
  std::vector<double> weights_;
  std::vector<std::int64_t> row_a_, row_b_;
  std::vector<std::int64_t> same_, move_;
  std::vector<double> base_;
  BazziDraws draws_;
};

struct TraceRecord {
  int sweep = 0;
  double log_posterior = 0.0;
  const CommunityAssignment* assignment = nullptr;
};

struct ChainDiagnostics {
  std::int64_t gibbs_updates = 0;
  std::int64_t swap_proposals = 0;
  std::int64_t swap_accepts = 0;
  /// Log posterior after every sweep (Bazzi: Monte Carlo estimate).
  std::vector<double> log_posterior_trace;

  double swap_acceptance_rate() const {
    return swap_proposals == 0 ? 0.0 : static_cast<double>(swap_accepts) / static_cast<double>(swap_proposals);
  }
};

struct ChainResult {
  std::vector<CommunityAssignment> samples;
  std::vector<int> sample_sweeps;
  CommunityAssignment final_state;
  ChainDiagnostics diagnostics;
};

struct ChainCallbacks {
  /// Called for every retained sample; when set, samples are not stored.
  std::function<void(const CommunityAssignment&, int sweep)> on_sample;
  /// Called after every sweep.
  std::function<void(const TraceRecord&)> on_trace;
};

/// Independent random streams of one chain, derived from the seed.
struct ChainStreams {
  explicit ChainStreams(std::uint64_t seed);
  Rng init;
  Rng decision;
  Rng gibbs;
  Rng swap;
  Rng monte_carlo;
  Rng diagnostics;
};

/// Runs sweeps over node-layers in the order (1,1), (1,2), ..., (1,L),
/// (2,1), ...; each visit is a swap proposal with probability
/// swap_probability and a Gibbs update otherwise. The Yang prior is rejected
/// (see run_yang_annealing).
ChainResult run_chain(const TemporalNetwork& A, const SamplerConfig& config, const JTable* table,
                      const ChainCallbacks& callbacks = {});

/// Table covering every community size of an n-node layer.
JTable table_for(int nodes);

// ---------------------------------------------------------------------------
// Annealed Gibbs baseline.

struct AnnealingStage {
  double temperature = 1.0;
  int sweeps = 1;
};
using AnnealingSchedule = std::vector<AnnealingStage>;

/// (1, 20), (0.9, 10), ..., (0.4, 10), (0.3, 5), (0.2, 5), (0.1, 5).
AnnealingSchedule default_annealing_schedule();
void validate_schedule(const AnnealingSchedule& schedule);

/// Chain state under the shared-kernel Markov prior (kernel rows integrated
/// out under Dir(1)) and a single SBM matrix shared by all layers.
class YangState {
public:
  YangState(const TemporalNetwork& A, CommunityAssignment initial);

  const CommunityAssignment& assignment() const { return g_; }
  double log_likelihood() const;
  double log_prior() const;
  double log_posterior() const { return log_likelihood() + log_prior(); }

  /// Unnormalised log full conditional of (i, l) at temperature 1.
  void full_conditional(int i, int l, std::span<double> log_weights);
  Label gibbs_update(int i, int l, double temperature, Rng& rng);

  void check_consistency() const;

private:
  double pooled_pair_term(Label r, Label s, std::int64_t dm, std::int64_t dt) const;
  double likelihood_delta(int l, Label a, Label b) const;
  double prior_delta(int i, int l, Label a, Label b);
  void apply(int i, int l, Label a, Label b);

  const TemporalNetwork* A_;
  CommunityAssignment g_;
  int k_;
  LogFactorials lf_;
  LikelihoodState layers_;
  CountMatrix pooled_m_;
  CountMatrix pooled_t_;
  CountMatrix pooled_transitions_;
  std::vector<std::int64_t> e_;
  std::vector<double> weights_;
};

struct AnnealingResult {
  CommunityAssignment estimate;
  std::vector<double> log_posterior_trace;
};

/// Starts from a draw of the Yang prior and runs each stage's sweeps with
/// full conditionals raised to 1/T. Returns the final assignment.
AnnealingResult run_yang_annealing(const TemporalNetwork& A, int communities, const AnnealingSchedule& schedule,
                                   Rng& rng);

} // namespace tempcomm
