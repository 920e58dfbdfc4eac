#include "tempcomm/likelihood.hpp"

#include <algorithm>
#include <cmath>

namespace tempcomm {

SbmParameters::SbmParameters(int communities, std::vector<SquareMatrix<double>> omega)
    : communities_(communities), omega_(std::move(omega)) {
  if (communities < 1) throw std::invalid_argument("SbmParameters: k must be positive");
  for (const auto& w : omega_) {
    if (w.size() != communities) throw std::invalid_argument("SbmParameters: matrix size differs from k");
    for (int r = 0; r < communities; ++r)
      for (int s = 0; s < communities; ++s) {
        if (!(w(r, s) >= 0.0 && w(r, s) <= 1.0)) throw std::invalid_argument("SbmParameters: entry outside [0, 1]");
        if (w(r, s) != w(s, r)) throw std::invalid_argument("SbmParameters: matrix is not symmetric");
      }
  }
}

SbmParameters SbmParameters::two_level(int layers, int communities, double diagonal, double off_diagonal) {
  if (layers < 1) throw std::invalid_argument("SbmParameters: L must be positive");
  SquareMatrix<double> w(communities, off_diagonal);
  for (int r = 0; r < communities; ++r) w(r, r) = diagonal;
  return SbmParameters(communities, std::vector<SquareMatrix<double>>(static_cast<std::size_t>(layers), w));
}

TemporalNetwork generate_sbm(const CommunityAssignment& g, const SbmParameters& params, Rng& rng) {
  if (params.layers() != g.layers() || params.communities() != g.communities())
    throw std::invalid_argument("generate_sbm: parameter dimensions do not match the assignment");
  const int n = g.nodes();
  std::vector<std::vector<Edge>> edges(static_cast<std::size_t>(g.layers()));
  for (int l = 0; l < g.layers(); ++l)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.bernoulli(params.omega(l, g.at(i, l), g.at(j, l)))) edges[static_cast<std::size_t>(l)].emplace_back(i, j);
  return TemporalNetwork(n, std::move(edges));
}

BlockCounts block_counts(const TemporalNetwork& A, const CommunityAssignment& g) {
  if (A.nodes() != g.nodes() || A.layers() != g.layers())
    throw std::invalid_argument("block_counts: network and assignment dimensions differ");
  BlockCounts counts(g.layers(), g.communities());
  for (int l = 0; l < g.layers(); ++l) {
    for (int i = 0; i < g.nodes(); ++i) counts.add_size(l, g.at(i, l), 1);
    for (const auto& [i, j] : A.edges(l)) counts.add_edges(l, g.at(i, l), g.at(j, l), 1);
  }
  counts.set_source_fingerprint(g.fingerprint());
  return counts;
}

double block_pair_log_term(const LogFactorials& lf, std::int64_t m, std::int64_t t) {
  if (m < 0 || m > t) throw InvariantViolation("likelihood: block edge count outside [0, t]");
  return lf(m) + lf(t - m) - lf(t + 1);
}

std::int64_t likelihood_factorial_bound(int nodes, int layers_pooled) {
  const std::int64_t n = nodes;
  // C(n, 2) >= floor(n/2) ceil(n/2) once n >= 2, and t + 1 is the largest argument.
  return static_cast<std::int64_t>(layers_pooled) * std::max(n * (n - 1) / 2, (n / 2) * ((n + 1) / 2)) + 1;
}

namespace {

int largest_layer_nodes(const BlockCounts& counts) {
  std::int64_t n = 0;
  for (int l = 0; l < counts.layers(); ++l) {
    std::int64_t layer_total = 0;
    for (Label r = 0; r < counts.communities(); ++r) layer_total += counts.size(l, r);
    n = std::max(n, layer_total);
  }
  return static_cast<int>(n);
}

} // namespace

LogProb marginal_log_likelihood(const BlockCounts& counts) {
  const LogFactorials lf(likelihood_factorial_bound(largest_layer_nodes(counts)));
  double total = 0.0;
  for (int l = 0; l < counts.layers(); ++l)
    for (Label r = 0; r < counts.communities(); ++r)
      for (Label s = r; s < counts.communities(); ++s) total += block_pair_log_term(lf, counts.m(l, r, s), counts.t(l, r, s));
  return LogProb::from_log(total);
}

LogProb shared_marginal_log_likelihood(const BlockCounts& counts) {
  const LogFactorials lf(likelihood_factorial_bound(largest_layer_nodes(counts), counts.layers()));
  double total = 0.0;
  for (Label r = 0; r < counts.communities(); ++r)
    for (Label s = r; s < counts.communities(); ++s) {
      std::int64_t m = 0;
      std::int64_t t = 0;
      for (int l = 0; l < counts.layers(); ++l) {
        m += counts.m(l, r, s);
        t += counts.t(l, r, s);
      }
      total += block_pair_log_term(lf, m, t);
    }
  return LogProb::from_log(total);
}

namespace {

// Change of the block-pair terms of layer l when one node with neighbour
// label counts e moves from a to b. Sizes are read before the move.
double layer_move_delta(const LogFactorials& lf, const BlockCounts& c, int l, Label a, Label b,
                        std::span<const std::int64_t> e) {
  if (a == b) return 0.0;
  const auto ea = e[static_cast<std::size_t>(a)];
  const auto eb = e[static_cast<std::size_t>(b)];
  const std::int64_t na = c.size(l, a);
  const std::int64_t nb = c.size(l, b);
  auto term = [&lf](std::int64_t m, std::int64_t t) { return block_pair_log_term(lf, m, t); };

  double delta = 0.0;
  delta += term(c.m(l, a, a) - ea, (na - 1) * (na - 2) / 2) - term(c.m(l, a, a), na * (na - 1) / 2);
  delta += term(c.m(l, b, b) + eb, (nb + 1) * nb / 2) - term(c.m(l, b, b), nb * (nb - 1) / 2);
  delta += term(c.m(l, a, b) + ea - eb, (na - 1) * (nb + 1)) - term(c.m(l, a, b), na * nb);
  for (Label x = 0; x < c.communities(); ++x) {
    if (x == a || x == b) continue;
    const auto ex = e[static_cast<std::size_t>(x)];
    const std::int64_t nx = c.size(l, x);
    delta += term(c.m(l, a, x) - ex, (na - 1) * nx) - term(c.m(l, a, x), na * nx);
    delta += term(c.m(l, b, x) + ex, (nb + 1) * nx) - term(c.m(l, b, x), nb * nx);
  }
  return delta;
}

void count_neighbor_labels(const TemporalNetwork& A, const CommunityAssignment& g, int i, int l,
                           std::span<std::int64_t> e) {
  std::fill(e.begin(), e.end(), 0);
  for (const int j : A.neighbors(l, i)) ++e[static_cast<std::size_t>(g.at(j, l))];
}

} // namespace

double marginal_log_likelihood_delta(const BlockCounts& counts, const TemporalNetwork& A,
                                     const CommunityAssignment& g, const LabelMove& move) {
  if (counts.source_fingerprint() != g.fingerprint())
    throw InvariantViolation("marginal_log_likelihood_delta: block counts are stale for this assignment");
  if (move.node < 0 || move.node >= g.nodes() || move.layer < 0 || move.layer >= g.layers())
    throw std::invalid_argument("marginal_log_likelihood_delta: node-layer out of range");
  if (move.to < 0 || move.to >= g.communities()) throw std::invalid_argument("marginal_log_likelihood_delta: label outside [k]");
  if (g.at(move.node, move.layer) != move.from)
    throw InvariantViolation("marginal_log_likelihood_delta: move does not start from the current label");
  std::vector<std::int64_t> e(static_cast<std::size_t>(g.communities()));
  count_neighbor_labels(A, g, move.node, move.layer, e);
  const LogFactorials lf(likelihood_factorial_bound(g.nodes()));
  return layer_move_delta(lf, counts, move.layer, move.from, move.to, e);
}

LikelihoodState::LikelihoodState(const TemporalNetwork& A, const CommunityAssignment& g)
    : A_(&A), lf_(likelihood_factorial_bound(g.nodes())), counts_(block_counts(A, g)),
      log_likelihood_(marginal_log_likelihood(counts_).log()) {}

void LikelihoodState::neighbor_label_counts(const CommunityAssignment& g, int i, int l,
                                            std::span<std::int64_t> e) const {
  count_neighbor_labels(*A_, g, i, l, e);
}

void LikelihoodState::move_deltas(int l, Label a, std::span<const std::int64_t> e, std::span<double> out) const {
  for (Label b = 0; b < counts_.communities(); ++b) out[static_cast<std::size_t>(b)] = layer_move_delta(lf_, counts_, l, a, b, e);
}

double LikelihoodState::move_delta(int l, Label a, Label b, std::span<const std::int64_t> e) const {
  return layer_move_delta(lf_, counts_, l, a, b, e);
}

void LikelihoodState::apply_move(int l, Label a, Label b, std::span<const std::int64_t> e, double delta) {
  if (a == b) return;
  const auto ea = e[static_cast<std::size_t>(a)];
  const auto eb = e[static_cast<std::size_t>(b)];
  counts_.add_edges(l, a, a, -ea);
  counts_.add_edges(l, b, b, eb);
  counts_.add_edges(l, a, b, ea - eb);
  for (Label x = 0; x < counts_.communities(); ++x) {
    if (x == a || x == b) continue;
    const auto ex = e[static_cast<std::size_t>(x)];
    counts_.add_edges(l, a, x, -ex);
    counts_.add_edges(l, b, x, ex);
  }
  counts_.add_size(l, a, -1);
  counts_.add_size(l, b, 1);
  log_likelihood_ += delta;
}

void LikelihoodState::check_consistency(const CommunityAssignment& g, double tolerance) const {
  const BlockCounts fresh = block_counts(*A_, g);
  if (!(fresh == counts_)) throw InvariantViolation("LikelihoodState: cached block counts differ from recomputation");
  const double exact = marginal_log_likelihood(fresh).log();
  if (std::abs(exact - log_likelihood_) > tolerance)
    throw InvariantViolation("LikelihoodState: cached log-likelihood drifted by " +
                             std::to_string(exact - log_likelihood_));
}

} // namespace tempcomm
