#pragma once

// Domain types shared by every module: networks, community assignments,
// weak compositions, block counts, size histograms and log-probabilities.
//
// Node, layer and label indices are 0-based throughout the C++ API. The JSON
// formats and the CLI use the 1-based conventions ([k] = {1, ..., k}); the
// conversion happens in io.cpp and nowhere else.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tempcomm {

using Label = std::int32_t;

/// Raised when an internal consistency condition fails (stale caches,
/// counts that violate 0 <= m <= t, ...).
class InvariantViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// A probability carried in log space. Multiplication and division act on the
/// underlying probabilities, so `a * b` adds log values.
class LogProb {
public:
  constexpr LogProb() = default;

  static constexpr LogProb from_log(double log_value) { return LogProb(log_value); }
  static LogProb from_prob(double p) { return LogProb(std::log(p)); }
  static constexpr LogProb zero() { return LogProb(-std::numeric_limits<double>::infinity()); }
  static constexpr LogProb one() { return LogProb(0.0); }

  constexpr double log() const { return value_; }
  double prob() const { return std::exp(value_); }

  constexpr LogProb& operator*=(LogProb other) {
    value_ += other.value_;
    return *this;
  }
  constexpr LogProb& operator/=(LogProb other) {
    value_ -= other.value_;
    return *this;
  }
  friend constexpr LogProb operator*(LogProb a, LogProb b) { return a *= b; }
  friend constexpr LogProb operator/(LogProb a, LogProb b) { return a /= b; }
  friend constexpr bool operator==(LogProb, LogProb) = default;
  friend constexpr auto operator<=>(LogProb, LogProb) = default;

private:
  constexpr explicit LogProb(double v) : value_(v) {}
  double value_ = 0.0;
};

/// log(sum_i exp(values[i])), robust to -inf entries.
double log_sum_exp(std::span<const double> values);

/// Table of log(m!) for m = 0..max.
class LogFactorials {
public:
  explicit LogFactorials(std::int64_t max_argument = 0);

  double operator()(std::int64_t m) const {
    if (m < 0 || m >= static_cast<std::int64_t>(table_.size()))
      throw std::out_of_range("LogFactorials: argument " + std::to_string(m) + " outside table");
    return table_[static_cast<std::size_t>(m)];
  }
  std::int64_t max_argument() const { return static_cast<std::int64_t>(table_.size()) - 1; }

  /// log C(a, b); zero-probability combinations (b < 0 or b > a) return -inf.
  double log_binomial(std::int64_t a, std::int64_t b) const;

private:
  std::vector<double> table_;
};

/// Dense k x k matrix, row-major.
template <class T>
class SquareMatrix {
public:
  SquareMatrix() = default;
  explicit SquareMatrix(int size, T fill = T{})
      : size_(size), data_(static_cast<std::size_t>(size) * static_cast<std::size_t>(size), fill) {}

  int size() const { return size_; }
  T& operator()(int r, int s) { return data_[index(r, s)]; }
  const T& operator()(int r, int s) const { return data_[index(r, s)]; }
  std::span<T> row(int r) { return {data_.data() + index(r, 0), static_cast<std::size_t>(size_)}; }
  std::span<const T> row(int r) const {
    return {data_.data() + index(r, 0), static_cast<std::size_t>(size_)};
  }
  std::span<const T> data() const { return data_; }

  void swap_rows(int a, int b) {
    for (int c = 0; c < size_; ++c) std::swap((*this)(a, c), (*this)(b, c));
  }
  void swap_columns(int a, int b) {
    for (int r = 0; r < size_; ++r) std::swap((*this)(r, a), (*this)(r, b));
  }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

private:
  std::size_t index(int r, int s) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(size_) + static_cast<std::size_t>(s);
  }
  int size_ = 0;
  std::vector<T> data_;
};

using CountMatrix = SquareMatrix<std::int64_t>;

/// Undirected edge between 0-based node ids.
using Edge = std::pair<int, int>;

/// A sequence of L symmetric binary adjacency matrices on n nodes.
class TemporalNetwork {
public:
  /// Builds from one edge list per layer. Rejects self-edges and
  /// out-of-range ids; duplicate edges are rejected as multi-edges.
  TemporalNetwork(int nodes, std::vector<std::vector<Edge>> layer_edges);

  /// Builds from dense row-major n x n matrices. Validates symmetry, zero
  /// diagonal and {0,1} entries.
  static TemporalNetwork from_dense(int nodes, const std::vector<std::vector<std::uint8_t>>& layers);

  int nodes() const { return nodes_; }
  int layers() const { return static_cast<int>(adjacency_.size()); }

  bool adjacent(int layer, int i, int j) const {
    return adjacency_[static_cast<std::size_t>(layer)][static_cast<std::size_t>(i) * nodes_ + j] != 0;
  }
  std::span<const std::uint8_t> adjacency(int layer) const { return adjacency_[static_cast<std::size_t>(layer)]; }
  std::span<const int> neighbors(int layer, int i) const;
  std::int64_t edge_count(int layer) const;
  std::vector<Edge> edges(int layer) const;

  friend bool operator==(const TemporalNetwork& a, const TemporalNetwork& b) {
    return a.nodes_ == b.nodes_ && a.adjacency_ == b.adjacency_;
  }

private:
  TemporalNetwork() = default;
  void build_neighbor_lists();

  int nodes_ = 0;
  std::vector<std::vector<std::uint8_t>> adjacency_;
  // CSR neighbour lists per layer.
  std::vector<std::vector<int>> offsets_;
  std::vector<std::vector<int>> targets_;
};

/// n x L matrix of labels in {0, ..., k-1}. Stored layer-major.
class CommunityAssignment {
public:
  CommunityAssignment() = default;
  /// All node-layers labelled 0.
  CommunityAssignment(int nodes, int layers, int communities);
  /// `layer_major[l * n + i]` is the label of node-layer (i, l).
  CommunityAssignment(int nodes, int layers, int communities, std::vector<Label> layer_major);

  /// Single-layer convenience constructor.
  static CommunityAssignment monolayer(int communities, std::vector<Label> labels);
  /// From per-layer label vectors (layers[l][i]).
  static CommunityAssignment from_layers(int communities, const std::vector<std::vector<Label>>& layers);

  int nodes() const { return nodes_; }
  int layers() const { return layers_; }
  int communities() const { return communities_; }

  Label at(int i, int l) const { return labels_[index(i, l)]; }
  void set(int i, int l, Label r);
  std::span<const Label> layer(int l) const {
    return {labels_.data() + static_cast<std::size_t>(l) * nodes_, static_cast<std::size_t>(nodes_)};
  }
  std::span<const Label> labels() const { return labels_; }

  /// Exchanges labels a and b in every layer >= first_layer.
  void swap_labels(Label a, Label b, int first_layer);

  /// Order-sensitive hash of the labels, maintained in O(1) per set().
  std::uint64_t fingerprint() const { return fingerprint_; }

  friend bool operator==(const CommunityAssignment& a, const CommunityAssignment& b) {
    return a.nodes_ == b.nodes_ && a.layers_ == b.layers_ && a.communities_ == b.communities_ &&
           a.labels_ == b.labels_;
  }

private:
  std::size_t index(int i, int l) const {
    return static_cast<std::size_t>(l) * static_cast<std::size_t>(nodes_) + static_cast<std::size_t>(i);
  }
  void validate() const;
  std::uint64_t recompute_fingerprint() const;

  int nodes_ = 0;
  int layers_ = 0;
  int communities_ = 0;
  std::vector<Label> labels_;
  std::uint64_t fingerprint_ = 0;
};

/// Ordered tuple of non-negative integers with fixed sum.
class WeakComposition {
public:
  WeakComposition() = default;
  explicit WeakComposition(std::vector<std::int64_t> parts);

  std::span<const std::int64_t> parts() const { return parts_; }
  std::int64_t operator[](std::size_t r) const { return parts_[r]; }
  std::size_t size() const { return parts_.size(); }
  std::int64_t total() const { return total_; }

  friend bool operator==(const WeakComposition&, const WeakComposition&) = default;
  friend auto operator<=>(const WeakComposition& a, const WeakComposition& b) { return a.parts_ <=> b.parts_; }

private:
  std::vector<std::int64_t> parts_;
  std::int64_t total_ = 0;
};

/// Per-layer community sizes and block edge counts.
///
/// For r != s, t(l,r,s) = n_r n_s ordered-pair count and m(l,r,s) the edges
/// between the two blocks; for r == s, t = C(n_r, 2) and m the internal edges.
/// The edge matrix is stored symmetrically.
class BlockCounts {
public:
  BlockCounts() = default;
  BlockCounts(int layers, int communities);

  int layers() const { return static_cast<int>(sizes_.size()); }
  int communities() const { return communities_; }

  std::int64_t size(int l, Label r) const { return sizes_[static_cast<std::size_t>(l)][static_cast<std::size_t>(r)]; }
  std::int64_t m(int l, Label r, Label s) const { return edges_[static_cast<std::size_t>(l)](r, s); }
  std::int64_t t(int l, Label r, Label s) const {
    const std::int64_t nr = size(l, r);
    return r == s ? nr * (nr - 1) / 2 : nr * size(l, s);
  }

  void set_size(int l, Label r, std::int64_t value) { sizes_[static_cast<std::size_t>(l)][static_cast<std::size_t>(r)] = value; }
  void add_size(int l, Label r, std::int64_t delta) { sizes_[static_cast<std::size_t>(l)][static_cast<std::size_t>(r)] += delta; }
  void add_edges(int l, Label r, Label s, std::int64_t delta);
  void swap_labels(Label a, Label b, int first_layer);

  /// Fingerprint of the assignment these counts describe (see
  /// CommunityAssignment::fingerprint).
  std::uint64_t source_fingerprint() const { return source_fingerprint_; }
  void set_source_fingerprint(std::uint64_t f) { source_fingerprint_ = f; }

  /// Throws InvariantViolation unless 0 <= m <= t everywhere.
  void check_invariants() const;

  friend bool operator==(const BlockCounts& a, const BlockCounts& b) {
    return a.communities_ == b.communities_ && a.sizes_ == b.sizes_ && a.edges_ == b.edges_;
  }

private:
  int communities_ = 0;
  std::vector<std::vector<std::int64_t>> sizes_;
  std::vector<CountMatrix> edges_;
  std::uint64_t source_fingerprint_ = 0;
};

/// Counts of community sizes 0..max_size over M samples.
class SizeHistogram {
public:
  SizeHistogram() = default;
  explicit SizeHistogram(std::int64_t max_size) : counts_(static_cast<std::size_t>(max_size + 1), 0) {}
  SizeHistogram(std::vector<std::uint64_t> counts);

  void add(std::int64_t size, std::uint64_t times = 1);
  void merge(const SizeHistogram& other);

  std::int64_t max_size() const { return static_cast<std::int64_t>(counts_.size()) - 1; }
  std::uint64_t samples() const { return samples_; }
  std::span<const std::uint64_t> counts() const { return counts_; }
  double frequency(std::int64_t size) const;
  std::vector<double> frequencies() const;

  friend bool operator==(const SizeHistogram&, const SizeHistogram&) = default;

private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t samples_ = 0;
};

/// Sizes of communities 0..k-1 in one layer.
WeakComposition community_sizes(const CommunityAssignment& g, int layer);

/// k x k matrix whose (r, s) entry counts nodes labelled r in `previous` and
/// s in `current`.
CountMatrix transition_counts(std::span<const Label> previous, std::span<const Label> current, int communities);

} // namespace tempcomm
