#include "tempcomm/core.hpp"

#include "tempcomm/random.hpp"

#include <algorithm>
#include <numeric>

namespace tempcomm {

double log_sum_exp(std::span<const double> values) {
  double peak = -std::numeric_limits<double>::infinity();
  for (const double v : values) peak = std::max(peak, v);
  if (!std::isfinite(peak)) return peak;
  double total = 0.0;
  for (const double v : values) total += std::exp(v - peak);
  return peak + std::log(total);
}

LogFactorials::LogFactorials(std::int64_t max_argument)
    : table_(static_cast<std::size_t>(std::max<std::int64_t>(max_argument, 1) + 1), 0.0) {
  for (std::size_t m = 2; m < table_.size(); ++m) table_[m] = table_[m - 1] + std::log(static_cast<double>(m));
}

double LogFactorials::log_binomial(std::int64_t a, std::int64_t b) const {
  if (b < 0 || b > a) return -std::numeric_limits<double>::infinity();
  return (*this)(a) - (*this)(b) - (*this)(a - b);
}

// ---------------------------------------------------------------------------

TemporalNetwork::TemporalNetwork(int nodes, std::vector<std::vector<Edge>> layer_edges) : nodes_(nodes) {
  if (nodes < 1) throw std::invalid_argument("TemporalNetwork: node count must be positive");
  if (layer_edges.empty()) throw std::invalid_argument("TemporalNetwork: layer count must be positive");
  const auto n = static_cast<std::size_t>(nodes);
  adjacency_.assign(layer_edges.size(), std::vector<std::uint8_t>(n * n, 0));
  for (std::size_t l = 0; l < layer_edges.size(); ++l) {
    for (const auto& [i, j] : layer_edges[l]) {
      if (i < 0 || j < 0 || i >= nodes || j >= nodes)
        throw std::invalid_argument("TemporalNetwork: edge endpoint out of range in layer " + std::to_string(l));
      if (i == j) throw std::invalid_argument("TemporalNetwork: self-edge in layer " + std::to_string(l));
      auto& cell = adjacency_[l][static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)];
      if (cell != 0) throw std::invalid_argument("TemporalNetwork: duplicate edge in layer " + std::to_string(l));
      cell = 1;
      adjacency_[l][static_cast<std::size_t>(j) * n + static_cast<std::size_t>(i)] = 1;
    }
  }
  build_neighbor_lists();
}

TemporalNetwork TemporalNetwork::from_dense(int nodes, const std::vector<std::vector<std::uint8_t>>& layers) {
  if (nodes < 1) throw std::invalid_argument("TemporalNetwork: node count must be positive");
  if (layers.empty()) throw std::invalid_argument("TemporalNetwork: layer count must be positive");
  const auto n = static_cast<std::size_t>(nodes);
  TemporalNetwork net;
  net.nodes_ = nodes;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& a = layers[l];
    if (a.size() != n * n) throw std::invalid_argument("TemporalNetwork: layer matrix has wrong size");
    for (std::size_t i = 0; i < n; ++i) {
      if (a[i * n + i] != 0) throw std::invalid_argument("TemporalNetwork: nonzero diagonal");
      for (std::size_t j = 0; j < n; ++j) {
        if (a[i * n + j] > 1) throw std::invalid_argument("TemporalNetwork: entries must be 0 or 1");
        if (a[i * n + j] != a[j * n + i]) throw std::invalid_argument("TemporalNetwork: layer matrix not symmetric");
      }
    }
  }
  net.adjacency_ = layers;
  net.build_neighbor_lists();
  return net;
}

void TemporalNetwork::build_neighbor_lists() {
  const auto n = static_cast<std::size_t>(nodes_);
  offsets_.assign(adjacency_.size(), {});
  targets_.assign(adjacency_.size(), {});
  for (std::size_t l = 0; l < adjacency_.size(); ++l) {
    auto& off = offsets_[l];
    auto& tgt = targets_[l];
    off.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j)
        if (adjacency_[l][i * n + j] != 0) tgt.push_back(static_cast<int>(j));
      off[i + 1] = static_cast<int>(tgt.size());
    }
  }
}

std::span<const int> TemporalNetwork::neighbors(int layer, int i) const {
  const auto& off = offsets_[static_cast<std::size_t>(layer)];
  const auto begin = static_cast<std::size_t>(off[static_cast<std::size_t>(i)]);
  const auto end = static_cast<std::size_t>(off[static_cast<std::size_t>(i) + 1]);
  return std::span<const int>(targets_[static_cast<std::size_t>(layer)]).subspan(begin, end - begin);
}

std::int64_t TemporalNetwork::edge_count(int layer) const {
  return static_cast<std::int64_t>(targets_[static_cast<std::size_t>(layer)].size()) / 2;
}

std::vector<Edge> TemporalNetwork::edges(int layer) const {
  std::vector<Edge> out;
  for (int i = 0; i < nodes_; ++i)
    for (const int j : neighbors(layer, i))
      if (i < j) out.emplace_back(i, j);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t cell_hash(std::size_t position, Label label) {
  return mix64((static_cast<std::uint64_t>(position) << 16) ^ static_cast<std::uint64_t>(label) ^ 0x5851f42d4c957f2dULL);
}

} // namespace

CommunityAssignment::CommunityAssignment(int nodes, int layers, int communities)
    : CommunityAssignment(nodes, layers, communities,
                          std::vector<Label>(static_cast<std::size_t>(std::max(nodes, 0)) *
                                                 static_cast<std::size_t>(std::max(layers, 0)),
                                             0)) {}

CommunityAssignment::CommunityAssignment(int nodes, int layers, int communities, std::vector<Label> layer_major)
    : nodes_(nodes), layers_(layers), communities_(communities), labels_(std::move(layer_major)) {
  validate();
  fingerprint_ = recompute_fingerprint();
}

CommunityAssignment CommunityAssignment::monolayer(int communities, std::vector<Label> labels) {
  const int n = static_cast<int>(labels.size());
  return CommunityAssignment(n, 1, communities, std::move(labels));
}

CommunityAssignment CommunityAssignment::from_layers(int communities, const std::vector<std::vector<Label>>& layers) {
  if (layers.empty()) throw std::invalid_argument("CommunityAssignment: layer count must be positive");
  const std::size_t n = layers.front().size();
  std::vector<Label> flat;
  flat.reserve(n * layers.size());
  for (const auto& layer : layers) {
    if (layer.size() != n) throw std::invalid_argument("CommunityAssignment: ragged layers");
    flat.insert(flat.end(), layer.begin(), layer.end());
  }
  return CommunityAssignment(static_cast<int>(n), static_cast<int>(layers.size()), communities, std::move(flat));
}

void CommunityAssignment::validate() const {
  if (nodes_ < 1 || layers_ < 1 || communities_ < 1)
    throw std::invalid_argument("CommunityAssignment: n, L and k must be positive");
  if (labels_.size() != static_cast<std::size_t>(nodes_) * static_cast<std::size_t>(layers_))
    throw std::invalid_argument("CommunityAssignment: label count does not match n x L");
  for (const Label r : labels_)
    if (r < 0 || r >= communities_) throw std::invalid_argument("CommunityAssignment: label outside [k]");
}

std::uint64_t CommunityAssignment::recompute_fingerprint() const {
  std::uint64_t f = 0;
  for (std::size_t p = 0; p < labels_.size(); ++p) f ^= cell_hash(p, labels_[p]);
  return f;
}

void CommunityAssignment::set(int i, int l, Label r) {
  if (i < 0 || i >= nodes_ || l < 0 || l >= layers_) throw std::out_of_range("CommunityAssignment::set: index out of range");
  if (r < 0 || r >= communities_) throw std::invalid_argument("CommunityAssignment::set: label outside [k]");
  const std::size_t p = index(i, l);
  fingerprint_ ^= cell_hash(p, labels_[p]) ^ cell_hash(p, r);
  labels_[p] = r;
}

void CommunityAssignment::swap_labels(Label a, Label b, int first_layer) {
  if (a < 0 || b < 0 || a >= communities_ || b >= communities_)
    throw std::invalid_argument("CommunityAssignment::swap_labels: label outside [k]");
  for (std::size_t p = static_cast<std::size_t>(std::max(first_layer, 0)) * nodes_; p < labels_.size(); ++p) {
    const Label old = labels_[p];
    if (old != a && old != b) continue;
    const Label now = old == a ? b : a;
    fingerprint_ ^= cell_hash(p, old) ^ cell_hash(p, now);
    labels_[p] = now;
  }
}

// ---------------------------------------------------------------------------

WeakComposition::WeakComposition(std::vector<std::int64_t> parts) : parts_(std::move(parts)) {
  for (const auto v : parts_) {
    if (v < 0) throw std::invalid_argument("WeakComposition: parts must be non-negative");
    total_ += v;
  }
}

// ---------------------------------------------------------------------------

BlockCounts::BlockCounts(int layers, int communities)
    : communities_(communities),
      sizes_(static_cast<std::size_t>(layers), std::vector<std::int64_t>(static_cast<std::size_t>(communities), 0)),
      edges_(static_cast<std::size_t>(layers), CountMatrix(communities)) {}

void BlockCounts::add_edges(int l, Label r, Label s, std::int64_t delta) {
  auto& m = edges_[static_cast<std::size_t>(l)];
  m(r, s) += delta;
  if (r != s) m(s, r) += delta;
}

void BlockCounts::swap_labels(Label a, Label b, int first_layer) {
  for (int l = std::max(first_layer, 0); l < layers(); ++l) {
    std::swap(sizes_[static_cast<std::size_t>(l)][static_cast<std::size_t>(a)],
              sizes_[static_cast<std::size_t>(l)][static_cast<std::size_t>(b)]);
    edges_[static_cast<std::size_t>(l)].swap_rows(a, b);
    edges_[static_cast<std::size_t>(l)].swap_columns(a, b);
  }
}

void BlockCounts::check_invariants() const {
  for (int l = 0; l < layers(); ++l)
    for (Label r = 0; r < communities_; ++r)
      for (Label s = r; s < communities_; ++s) {
        const auto mm = m(l, r, s);
        if (mm < 0 || mm > t(l, r, s))
          throw InvariantViolation("BlockCounts: edge count outside [0, t] at layer " + std::to_string(l));
      }
}

// ---------------------------------------------------------------------------

SizeHistogram::SizeHistogram(std::vector<std::uint64_t> counts) : counts_(std::move(counts)) {
  samples_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

void SizeHistogram::add(std::int64_t size, std::uint64_t times) {
  if (size < 0 || size > max_size()) throw std::out_of_range("SizeHistogram::add: size outside support");
  counts_[static_cast<std::size_t>(size)] += times;
  samples_ += times;
}

void SizeHistogram::merge(const SizeHistogram& other) {
  if (other.counts_.size() != counts_.size()) throw std::invalid_argument("SizeHistogram::merge: support mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  samples_ += other.samples_;
}

double SizeHistogram::frequency(std::int64_t size) const {
  if (samples_ == 0) throw std::logic_error("SizeHistogram: no samples");
  return static_cast<double>(counts_.at(static_cast<std::size_t>(size))) / static_cast<double>(samples_);
}

std::vector<double> SizeHistogram::frequencies() const {
  std::vector<double> f(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) f[i] = frequency(static_cast<std::int64_t>(i));
  return f;
}

// ---------------------------------------------------------------------------

WeakComposition community_sizes(const CommunityAssignment& g, int layer) {
  if (layer < 0 || layer >= g.layers()) throw std::invalid_argument("community_sizes: layer index out of range");
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(g.communities()), 0);
  for (const Label r : g.layer(layer)) ++sizes[static_cast<std::size_t>(r)];
  return WeakComposition(std::move(sizes));
}

CountMatrix transition_counts(std::span<const Label> previous, std::span<const Label> current, int communities) {
  if (previous.size() != current.size()) throw std::invalid_argument("transition_counts: length mismatch");
  if (communities < 1) throw std::invalid_argument("transition_counts: community count must be positive");
  CountMatrix c(communities);
  for (std::size_t i = 0; i < previous.size(); ++i) {
    const Label r = previous[i];
    const Label s = current[i];
    if (r < 0 || s < 0 || r >= communities || s >= communities)
      throw std::invalid_argument("transition_counts: label outside [k]");
    ++c(r, s);
  }
  return c;
}

} // namespace tempcomm
