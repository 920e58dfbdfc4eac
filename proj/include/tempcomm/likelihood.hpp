#pragma once

// Temporal SBM: network generation and the likelihood with every block edge
// probability integrated out under a uniform prior,
//   P(A | g) = prod_l prod_{r <= s} m! (t - m)! / (t + 1)!.

#include "tempcomm/core.hpp"
#include "tempcomm/random.hpp"

#include <span>
#include <vector>

namespace tempcomm {

/// Per-layer symmetric k x k edge probabilities.
class SbmParameters {
public:
  SbmParameters(int communities, std::vector<SquareMatrix<double>> omega);

  /// Every layer uses `diagonal` within blocks and `off_diagonal` between.
  static SbmParameters two_level(int layers, int communities, double diagonal, double off_diagonal);

  int layers() const { return static_cast<int>(omega_.size()); }
  int communities() const { return communities_; }
  double omega(int l, Label r, Label s) const { return omega_[static_cast<std::size_t>(l)](r, s); }

private:
  int communities_;
  std::vector<SquareMatrix<double>> omega_;
};

TemporalNetwork generate_sbm(const CommunityAssignment& g, const SbmParameters& params, Rng& rng);

/// Sizes and edge counts of g on A; records g's fingerprint in the result.
BlockCounts block_counts(const TemporalNetwork& A, const CommunityAssignment& g);

/// log[m! (t - m)! / (t + 1)!]
double block_pair_log_term(const LogFactorials& lf, std::int64_t m, std::int64_t t);

/// Largest factorial argument any block pair of an n-node layer can need.
std::int64_t likelihood_factorial_bound(int nodes, int layers_pooled = 1);

/// Throws InvariantViolation if some m > t.
LogProb marginal_log_likelihood(const BlockCounts& counts);

/// Likelihood when one edge-probability matrix is shared by every layer:
/// m and t are pooled across layers before applying the block-pair term.
LogProb shared_marginal_log_likelihood(const BlockCounts& counts);

/// Relabel of node-layer (node, layer) from `from` to `to`.
struct LabelMove {
  int node = 0;
  int layer = 0;
  Label from = 0;
  Label to = 0;
};

/// Exact change in log P(A | g) caused by `move`. `counts` must describe `g`
/// (checked through the fingerprint) and g(node, layer) must equal `from`;
/// otherwise InvariantViolation.
double marginal_log_likelihood_delta(const BlockCounts& counts, const TemporalNetwork& A,
                                     const CommunityAssignment& g, const LabelMove& move);

/// Incremental likelihood bookkeeping for a single chain.
///
/// For a node with e_s neighbours labelled s in its layer, moving it from a
/// to b changes m_aa by -e_a, m_ab by e_a - e_b, m_bb by e_b, and shifts e_x
/// from (a, x) to (b, x) for every other x.
class LikelihoodState {
public:
  LikelihoodState(const TemporalNetwork& A, const CommunityAssignment& g);

  const BlockCounts& counts() const { return counts_; }
  double log_likelihood() const { return log_likelihood_; }
  const LogFactorials& log_factorials() const { return lf_; }

  /// e_s for node-layer (i, l) under g.
  void neighbor_label_counts(const CommunityAssignment& g, int i, int l, std::span<std::int64_t> e) const;

  /// out[b] = change in log-likelihood for moving a node with neighbour
  /// counts e from a to b in layer l (out[a] = 0).
  void move_deltas(int l, Label a, std::span<const std::int64_t> e, std::span<double> out) const;
  double move_delta(int l, Label a, Label b, std::span<const std::int64_t> e) const;

  /// Updates counts and the cached total; `delta` must be move_delta(...).
  void apply_move(int l, Label a, Label b, std::span<const std::int64_t> e, double delta);
  void swap_labels(Label a, Label b, int first_layer) { counts_.swap_labels(a, b, first_layer); }
  /// Records which assignment the counts now describe.
  void set_source_fingerprint(std::uint64_t f) { counts_.set_source_fingerprint(f); }

  /// Recomputes everything from scratch and throws InvariantViolation if the
  /// cache disagrees beyond `tolerance`.
  void check_consistency(const CommunityAssignment& g, double tolerance = 1e-8) const;

private:
  const TemporalNetwork* A_;
  LogFactorials lf_;
  BlockCounts counts_;
  double log_likelihood_;
};

} // namespace tempcomm
