#pragma once

// Measurements: community-size histograms and IPR, NMI, one-sided
// Mann-Whitney tests, the LECS two-community size chain and asymptotic IPR
// reference values.

#include "tempcomm/core.hpp"

#include <span>
#include <vector>

namespace tempcomm {

/// Which community sizes a histogram counts.
class HistogramMode {
public:
  enum class Kind { Monolayer, PerLayer, Overall };

  /// Size in the single layer of a monolayer assignment.
  static HistogramMode monolayer() { return HistogramMode(Kind::Monolayer, 0); }
  /// Size in layer l (0-based).
  static HistogramMode per_layer(int l);
  /// Number of node-layers carrying the label across all layers.
  static HistogramMode overall() { return HistogramMode(Kind::Overall, 0); }

  Kind kind() const { return kind_; }
  int layer() const { return layer_; }

private:
  HistogramMode(Kind kind, int layer) : kind_(kind), layer_(layer) {}
  Kind kind_;
  int layer_;
};

/// Largest size the mode can observe for an n x L assignment.
std::int64_t histogram_support_max(HistogramMode mode, int nodes, int layers);

/// Size of `community` in g under `mode`.
std::int64_t observed_size(const CommunityAssignment& g, HistogramMode mode, Label community);

/// Adds one observation of g to h. Validates the mode against g.
void accumulate_size(SizeHistogram& h, const CommunityAssignment& g, HistogramMode mode, Label community);

/// Throws std::invalid_argument for an empty sample set or mixed dimensions.
SizeHistogram community_size_histogram(std::span<const CommunityAssignment> samples, HistogramMode mode,
                                       Label community);

/// sum_i P_i^2 of the normalised histogram; throws for an empty histogram.
double ipr(const SizeHistogram& h);
double ipr(std::span<const double> frequencies);

double total_variation(std::span<const double> p, std::span<const double> q);

/// Normalised mutual information over node-layers with the arithmetic-mean
/// normalisation and natural logarithms. Two single-label assignments give 1.
double nmi(const CommunityAssignment& a, const CommunityAssignment& b);
double nmi(std::span<const Label> a, std::span<const Label> b);

/// Largest number of node-layers on which a and b agree under one global
/// relabelling of b. Requires k <= 8.
std::int64_t best_permutation_agreement(const CommunityAssignment& a, const CommunityAssignment& b);

struct MannWhitneyResult {
  double u = 0.0;
  double p_value = 1.0;
  bool exact = false;
};

/// One-sided test of "x tends to exceed y". Midranks for ties; exact when
/// min(|x|, |y|) < 20, otherwise the normal approximation.
MannWhitneyResult mann_whitney_one_sided(std::span<const double> x, std::span<const double> y);
/// P(U >= u_obs) from the exact permutation law given the observed ties.
MannWhitneyResult mann_whitney_exact(std::span<const double> x, std::span<const double> y);
/// Normal approximation with tie-corrected variance and continuity correction.
MannWhitneyResult mann_whitney_normal(std::span<const double> x, std::span<const double> y);

/// Limit law of the community-1 size under LECS with fixed retention p and
/// k = 2: pi(i) proportional to (1 - p^(i+1)) (1 - p^(n-i+1)). Needs 0 < p < 1.
std::vector<double> lecs_stationary_distribution(int nodes, double p);

/// One-step kernel of that size chain: row i is the law of the next size.
std::vector<std::vector<double>> lecs_size_kernel(int nodes, double p);

/// 2 p^(eta+1) + p^(n+2): bound on |pi(i) / C - 1| for eta <= i <= n - eta,
/// where C = 1 / sum_j (1 - p^(j+1)) (1 - p^(n-j+1)) normalises pi.
double lecs_flatness_bound(int nodes, double p, int eta);

enum class AsymptoticModel { UniformAssignments, UniformCompositions };

/// Finite-n plug-in of the large-n IPR limits:
/// k / (2 sqrt(pi (k-1))) / sqrt(n) and (k-1)^2 / (2k-3) / n.
double asymptotic_ipr(int nodes, int communities, AsymptoticModel model);

} // namespace tempcomm
