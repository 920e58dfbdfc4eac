#pragma once

// Forward samplers for community-assignment priors, monolayer and temporal.

#include "tempcomm/core.hpp"
#include "tempcomm/random.hpp"

#include <string>
#include <variant>

namespace tempcomm {

/// How LECS draws the per-community, per-layer retention probability.
class RetentionMode {
public:
  /// p drawn uniformly on [0, 1] for every community and layer.
  static RetentionMode random() { return RetentionMode(); }
  /// p fixed for every community and layer; must lie in [0, 1].
  static RetentionMode fixed(double p);

  bool is_random() const { return random_; }
  double fixed_probability() const { return p_; }
  double draw(Rng& rng) const { return random_ ? rng.uniform() : p_; }

  friend bool operator==(const RetentionMode&, const RetentionMode&) = default;

private:
  RetentionMode() = default;
  bool random_ = true;
  double p_ = 0.0;
};

struct UniformAssignments {
  friend bool operator==(const UniformAssignments&, const UniformAssignments&) = default;
};
/// Dirichlet(1,...,1)-mixed iid labels; monolayer only.
struct NodewiseMonolayer {
  friend bool operator==(const NodewiseMonolayer&, const NodewiseMonolayer&) = default;
};
/// Markov chain with zero laziness and one shared kernel with Dir(1) rows.
struct YangMarkov {
  friend bool operator==(const YangMarkov&, const YangMarkov&) = default;
};
/// Per-layer laziness alpha ~ U(0,1) and shared row kappa ~ Dir(1).
struct BazziMarkov {
  friend bool operator==(const BazziMarkov&, const BazziMarkov&) = default;
};
/// Layerwise-exchangeable count splitting.
struct Lecs {
  RetentionMode retention = RetentionMode::random();
  friend bool operator==(const Lecs&, const Lecs&) = default;
};

using PriorKind = std::variant<UniformAssignments, NodewiseMonolayer, YangMarkov, BazziMarkov, Lecs>;

struct PriorModel {
  PriorKind kind;
  int nodes = 1;
  int layers = 1;
  int communities = 1;

  /// Throws std::invalid_argument when n, L, k < 1 or a monolayer-only
  /// model is given L > 1.
  void validate() const;
  std::string name() const;

  friend bool operator==(const PriorModel&, const PriorModel&) = default;
};

/// Parses "uniform", "nodewise", "yang", "bazzi", "lecs" (random retention) or
/// "lecs:<p>" (fixed retention).
PriorKind parse_prior_kind(const std::string& text);
std::string prior_kind_name(const PriorKind& kind);

/// Dir(1, ..., 1) via normalised unit-rate exponentials.
std::vector<double> sample_flat_dirichlet(int dimension, Rng& rng);

CommunityAssignment sample_uniform_assignment(int nodes, int layers, int communities, Rng& rng);

/// Uniform over all C(total + parts - 1, parts - 1) weak compositions
/// (stars and bars: parts - 1 distinct bar slots out of total + parts - 1).
WeakComposition sample_uniform_composition(std::int64_t total, int parts, Rng& rng);

CommunityAssignment sample_nodewise_monolayer(int nodes, int communities, Rng& rng);

/// Draw from {0, ..., n} with P(m) proportional to p^(n-m); p = 0 returns n.
std::int64_t sample_truncated_geometric(std::int64_t n, double p, Rng& rng);

CommunityAssignment sample_yang(int nodes, int layers, int communities, Rng& rng);
CommunityAssignment sample_bazzi(int nodes, int layers, int communities, Rng& rng);
CommunityAssignment sample_lecs(int nodes, int layers, int communities, const RetentionMode& retention, Rng& rng);

/// Dispatches on the model kind.
CommunityAssignment sample_prior(const PriorModel& model, Rng& rng);

} // namespace tempcomm
