#include "tempcomm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace tempcomm {

HistogramMode HistogramMode::per_layer(int l) {
  if (l < 0) throw std::invalid_argument("HistogramMode: negative layer index");
  return HistogramMode(Kind::PerLayer, l);
}

std::int64_t histogram_support_max(HistogramMode mode, int nodes, int layers) {
  return mode.kind() == HistogramMode::Kind::Overall ? static_cast<std::int64_t>(nodes) * layers : nodes;
}

std::int64_t observed_size(const CommunityAssignment& g, HistogramMode mode, Label community) {
  if (community < 0 || community >= g.communities()) throw std::invalid_argument("histogram: community outside [k]");
  switch (mode.kind()) {
  case HistogramMode::Kind::Monolayer:
    if (g.layers() != 1) throw std::invalid_argument("histogram: monolayer mode needs L = 1");
    return std::count(g.layer(0).begin(), g.layer(0).end(), community);
  case HistogramMode::Kind::PerLayer:
    if (mode.layer() >= g.layers()) throw std::invalid_argument("histogram: layer index outside [L]");
    return std::count(g.layer(mode.layer()).begin(), g.layer(mode.layer()).end(), community);
  case HistogramMode::Kind::Overall:
    return std::count(g.labels().begin(), g.labels().end(), community);
  }
  return 0;
}

void accumulate_size(SizeHistogram& h, const CommunityAssignment& g, HistogramMode mode, Label community) {
  h.add(observed_size(g, mode, community));
}

SizeHistogram community_size_histogram(std::span<const CommunityAssignment> samples, HistogramMode mode,
                                       Label community) {
  if (samples.empty()) throw std::invalid_argument("community_size_histogram: no samples");
  const auto& first = samples.front();
  SizeHistogram h(histogram_support_max(mode, first.nodes(), first.layers()));
  for (const auto& g : samples) {
    if (g.nodes() != first.nodes() || g.layers() != first.layers() || g.communities() != first.communities())
      throw std::invalid_argument("community_size_histogram: samples differ in (n, L, k)");
    accumulate_size(h, g, mode, community);
  }
  return h;
}

double ipr(std::span<const double> frequencies) {
  double total = 0.0;
  for (const double f : frequencies) total += f * f;
  return total;
}

double ipr(const SizeHistogram& h) {
  if (h.samples() == 0) throw std::invalid_argument("ipr: empty histogram");
  const auto f = h.frequencies();
  return ipr(f);
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] - q[i]);
  return 0.5 * total;
}

namespace {

double entropy_term(double count, double total) { return count > 0.0 ? (count / total) * std::log(count / total) : 0.0; }

} // namespace

double nmi(std::span<const Label> a, std::span<const Label> b) {
  if (a.size() != b.size()) throw std::invalid_argument("nmi: assignments differ in size");
  if (a.empty()) throw std::invalid_argument("nmi: empty assignments");
  const auto ka = static_cast<std::size_t>(*std::max_element(a.begin(), a.end())) + 1;
  const auto kb = static_cast<std::size_t>(*std::max_element(b.begin(), b.end())) + 1;
  if (*std::min_element(a.begin(), a.end()) < 0 || *std::min_element(b.begin(), b.end()) < 0)
    throw std::invalid_argument("nmi: negative label");
  std::vector<double> joint(ka * kb, 0.0);
  std::vector<double> ma(ka, 0.0);
  std::vector<double> mb(kb, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto r = static_cast<std::size_t>(a[i]);
    const auto s = static_cast<std::size_t>(b[i]);
    joint[r * kb + s] += 1.0;
    ma[r] += 1.0;
    mb[s] += 1.0;
  }
  const auto total = static_cast<double>(a.size());
  double ha = 0.0;
  double hb = 0.0;
  for (const double c : ma) ha -= entropy_term(c, total);
  for (const double c : mb) hb -= entropy_term(c, total);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  // Partitions equal up to relabelling: one occupied cell per used row and column.
  std::size_t cells = 0;
  for (const double c : joint) cells += c > 0.0 ? 1 : 0;
  const auto used = [](const std::vector<double>& m) { return std::count_if(m.begin(), m.end(), [](double c) { return c > 0.0; }); };
  if (static_cast<std::ptrdiff_t>(cells) == used(ma) && static_cast<std::ptrdiff_t>(cells) == used(mb)) return 1.0;
  double mutual = 0.0;
  for (std::size_t r = 0; r < ka; ++r)
    for (std::size_t s = 0; s < kb; ++s) {
      const double c = joint[r * kb + s];
      if (c > 0.0) mutual += (c / total) * std::log(c * total / (ma[r] * mb[s]));
    }
  return std::clamp(mutual / (0.5 * (ha + hb)), 0.0, 1.0);
}

double nmi(const CommunityAssignment& a, const CommunityAssignment& b) {
  if (a.nodes() != b.nodes() || a.layers() != b.layers()) throw std::invalid_argument("nmi: dimension mismatch");
  return nmi(a.labels(), b.labels());
}

std::int64_t best_permutation_agreement(const CommunityAssignment& a, const CommunityAssignment& b) {
  if (a.nodes() != b.nodes() || a.layers() != b.layers()) throw std::invalid_argument("agreement: dimension mismatch");
  const int k = std::max(a.communities(), b.communities());
  if (k > 8) throw std::invalid_argument("agreement: permutation search limited to k <= 8");
  const auto ku = static_cast<std::size_t>(k);
  std::vector<std::int64_t> confusion(ku * ku, 0);
  for (std::size_t p = 0; p < a.labels().size(); ++p)
    ++confusion[static_cast<std::size_t>(a.labels()[p]) * ku + static_cast<std::size_t>(b.labels()[p])];
  std::vector<int> perm(ku);
  std::iota(perm.begin(), perm.end(), 0);
  std::int64_t best = 0;
  do {
    std::int64_t agree = 0;
    for (std::size_t r = 0; r < ku; ++r) agree += confusion[r * ku + static_cast<std::size_t>(perm[r])];
    best = std::max(best, agree);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

namespace {

struct RankedSamples {
  std::vector<double> doubled_ranks_x;
  std::vector<double> doubled_ranks_all;
  double tie_sum = 0.0; // sum of t^3 - t over tie groups
};

RankedSamples rank_samples(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw std::invalid_argument("mann_whitney: samples must be non-empty");
  std::vector<std::pair<double, bool>> pooled;
  pooled.reserve(x.size() + y.size());
  for (const double v : x) pooled.emplace_back(v, true);
  for (const double v : y) pooled.emplace_back(v, false);
  std::sort(pooled.begin(), pooled.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  RankedSamples out;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
    // Ranks i+1..j share the midrank (i+1+j)/2; doubled it is an integer.
    const auto doubled = static_cast<double>(i + 1 + j);
    const auto t = static_cast<double>(j - i);
    out.tie_sum += t * t * t - t;
    for (std::size_t m = i; m < j; ++m) {
      out.doubled_ranks_all.push_back(doubled);
      if (pooled[m].second) out.doubled_ranks_x.push_back(doubled);
    }
    i = j;
  }
  return out;
}

double u_statistic(const RankedSamples& ranks, std::size_t nx) {
  const double doubled_sum = std::accumulate(ranks.doubled_ranks_x.begin(), ranks.doubled_ranks_x.end(), 0.0);
  return doubled_sum / 2.0 - static_cast<double>(nx) * static_cast<double>(nx + 1) / 2.0;
}

} // namespace

MannWhitneyResult mann_whitney_exact(std::span<const double> x, std::span<const double> y) {
  const RankedSamples ranks = rank_samples(x, y);
  const std::size_t nx = x.size();
  const std::size_t ny = y.size();
  const std::size_t m = std::min(nx, ny);
  const bool subset_is_x = nx <= ny;

  std::vector<int> items;
  items.reserve(ranks.doubled_ranks_all.size());
  for (const double r : ranks.doubled_ranks_all) items.push_back(static_cast<int>(r));
  const int max_sum = std::accumulate(items.begin(), items.end(), 0);

  // ways[j][s]: number of j-subsets of the pooled ranks with doubled sum s,
  // scaled by 1 / C(N, m) at the end.
  std::vector<std::vector<double>> ways(m + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
  ways[0][0] = 1.0;
  for (const int item : items)
    for (std::size_t j = m; j >= 1; --j) {
      auto& to = ways[j];
      const auto& from = ways[j - 1];
      for (int s = max_sum; s >= item; --s) to[static_cast<std::size_t>(s)] += from[static_cast<std::size_t>(s - item)];
    }
  const auto& law = ways[m];
  const double total = std::accumulate(law.begin(), law.end(), 0.0);

  const int observed_x = static_cast<int>(std::lround(std::accumulate(ranks.doubled_ranks_x.begin(), ranks.doubled_ranks_x.end(), 0.0)));
  double tail = 0.0;
  if (subset_is_x) {
    for (int s = observed_x; s <= max_sum; ++s) tail += law[static_cast<std::size_t>(s)];
  } else {
    // Rank sum of x is large exactly when that of y is small.
    const int observed_y = max_sum - observed_x;
    for (int s = 0; s <= observed_y; ++s) tail += law[static_cast<std::size_t>(s)];
  }
  return {u_statistic(ranks, nx), std::clamp(tail / total, 0.0, 1.0), true};
}

MannWhitneyResult mann_whitney_normal(std::span<const double> x, std::span<const double> y) {
  const RankedSamples ranks = rank_samples(x, y);
  const auto nx = static_cast<double>(x.size());
  const auto ny = static_cast<double>(y.size());
  const double n = nx + ny;
  const double u = u_statistic(ranks, x.size());
  const double mean = nx * ny / 2.0;
  const double variance = nx * ny / 12.0 * ((n + 1.0) - ranks.tie_sum / (n * (n - 1.0)));
  if (!(variance > 0.0)) return {u, 1.0, false};
  const double z = (u - mean - 0.5) / std::sqrt(variance);
  return {u, 0.5 * std::erfc(z / std::numbers::sqrt2), false};
}

MannWhitneyResult mann_whitney_one_sided(std::span<const double> x, std::span<const double> y) {
  return std::min(x.size(), y.size()) < 20 ? mann_whitney_exact(x, y) : mann_whitney_normal(x, y);
}

std::vector<double> lecs_stationary_distribution(int nodes, double p) {
  if (nodes < 1) throw std::invalid_argument("lecs_stationary_distribution: n must be positive");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("lecs_stationary_distribution: p must lie in (0, 1)");
  std::vector<double> pi(static_cast<std::size_t>(nodes) + 1);
  double total = 0.0;
  for (int i = 0; i <= nodes; ++i) {
    const double v = (1.0 - std::pow(p, i + 1)) * (1.0 - std::pow(p, nodes - i + 1));
    pi[static_cast<std::size_t>(i)] = v;
    total += v;
  }
  for (auto& v : pi) v /= total;
  return pi;
}

namespace {

// Law of the shortfall v on {0, ..., m} with weight p^v (0^0 = 1).
std::vector<double> shortfall_law(int m, double p) {
  std::vector<double> w(static_cast<std::size_t>(m) + 1);
  double total = 0.0;
  for (int v = 0; v <= m; ++v) {
    w[static_cast<std::size_t>(v)] = v == 0 ? 1.0 : std::pow(p, v);
    total += w[static_cast<std::size_t>(v)];
  }
  for (auto& x : w) x /= total;
  return w;
}

} // namespace

std::vector<std::vector<double>> lecs_size_kernel(int nodes, double p) {
  if (nodes < 1) throw std::invalid_argument("lecs_size_kernel: n must be positive");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("lecs_size_kernel: p must lie in [0, 1]");
  const auto size = static_cast<std::size_t>(nodes) + 1;
  std::vector<std::vector<double>> kernel(size, std::vector<double>(size, 0.0));
  for (int i = 0; i <= nodes; ++i) {
    const auto leave = shortfall_law(i, p);
    const auto join = shortfall_law(nodes - i, p);
    for (int v1 = 0; v1 <= i; ++v1)
      for (int v2 = 0; v2 <= nodes - i; ++v2)
        kernel[static_cast<std::size_t>(i)][static_cast<std::size_t>(i - v1 + v2)] +=
            leave[static_cast<std::size_t>(v1)] * join[static_cast<std::size_t>(v2)];
  }
  return kernel;
}

double lecs_flatness_bound(int nodes, double p, int eta) { return 2.0 * std::pow(p, eta + 1) + std::pow(p, nodes + 2); }

double asymptotic_ipr(int nodes, int communities, AsymptoticModel model) {
  if (nodes < 1) throw std::invalid_argument("asymptotic_ipr: n must be positive");
  if (communities < 2) throw std::invalid_argument("asymptotic_ipr: needs k >= 2");
  const double n = nodes;
  const double k = communities;
  if (model == AsymptoticModel::UniformAssignments) return k / (2.0 * std::sqrt(std::numbers::pi * (k - 1.0))) / std::sqrt(n);
  return (k - 1.0) * (k - 1.0) / (2.0 * k - 3.0) / n;
}

} // namespace tempcomm
