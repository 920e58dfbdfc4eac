#include "tempcomm/verification/oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tempcomm::oracle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double lgamma1(double x) { return std::lgamma(x + 1.0); }

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double top = std::max(a, b);
  return top + std::log(std::exp(a - top) + std::exp(b - top));
}

// Per-layer sizes of each label.
std::vector<int> sizes_of(std::span<const Label> layer, int k) {
  std::vector<int> out(static_cast<std::size_t>(k), 0);
  for (const Label g : layer) ++out[static_cast<std::size_t>(g)];
  return out;
}

} // namespace

double j_quadrature(int k1, int k2) {
  if (k1 < 0 || k1 > k2) throw std::invalid_argument("j_quadrature: need 0 <= k1 <= k2");
  auto f = [k1, k2](double x) {
    double denominator = 0.0;
    double power = 1.0;
    for (int j = 0; j <= k2; ++j) {
      denominator += power;
      power *= x;
    }
    return std::pow(x, k1) / denominator;
  };
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-12, &error);
}

double j_boost_digamma(int k1, int k2) {
  const double m = k2 + 1.0;
  return (boost::math::digamma((k1 + 2.0) / m) - boost::math::digamma((k1 + 1.0) / m)) / m;
}

double lecs_transition_log(std::span<const Label> prev, std::span<const Label> cur, int k) {
  if (prev.size() != cur.size()) throw std::invalid_argument("lecs_transition_log: layer length mismatch");
  double total = 0.0;
  for (Label r = 0; r < k; ++r) {
    std::vector<int> row(static_cast<std::size_t>(k), 0);
    int size = 0;
    for (std::size_t i = 0; i < prev.size(); ++i)
      if (prev[i] == r) {
        ++row[static_cast<std::size_t>(cur[i])];
        ++size;
      }
    if (size == 0) continue;
    const int movers = size - row[static_cast<std::size_t>(r)];
    if (k == 1) continue;
    // Retention: P(movers) = integral over p of the truncated geometric law.
    total += std::log(j_quadrature(movers, size));
    // Movers split by a uniform weak composition over the k - 1 other labels.
    total -= lgamma1(movers + k - 2.0) - lgamma1(movers) - lgamma1(k - 2.0);
    // Uniform labelling of the row's nodes given its counts.
    double multinomial = lgamma1(size);
    for (const int c : row) multinomial -= lgamma1(c);
    total -= multinomial;
  }
  return total;
}

double bazzi_transition_log(std::span<const Label> prev, std::span<const Label> cur, int k) {
  if (prev.size() != cur.size()) throw std::invalid_argument("bazzi_transition_log: layer length mismatch");
  std::vector<int> same(static_cast<std::size_t>(k), 0);
  std::vector<int> move(same.size(), 0);
  for (std::size_t i = 0; i < cur.size(); ++i) ++(prev[i] == cur[i] ? same : move)[static_cast<std::size_t>(cur[i])];
  const int A = std::accumulate(same.begin(), same.end(), 0);
  const int B = std::accumulate(move.begin(), move.end(), 0);

  // coeff[J] = log sum over (j_s) with sum j_s = J of prod_s C(same_s, j_s) (j_s + move_s)!
  std::vector<double> coeff{0.0};
  for (int s = 0; s < k; ++s) {
    const int a = same[static_cast<std::size_t>(s)];
    const int b = move[static_cast<std::size_t>(s)];
    std::vector<double> next(coeff.size() + static_cast<std::size_t>(a), kNegInf);
    for (std::size_t J = 0; J < coeff.size(); ++J)
      for (int j = 0; j <= a; ++j) {
        const double term = lgamma1(a) - lgamma1(j) - lgamma1(a - j) + lgamma1(j + b);
        next[J + static_cast<std::size_t>(j)] = log_add(next[J + static_cast<std::size_t>(j)], coeff[J] + term);
      }
    coeff = std::move(next);
  }
  double total = kNegInf;
  for (std::size_t J = 0; J < coeff.size(); ++J) {
    const int j = static_cast<int>(J);
    // alpha^(A - J) (1 - alpha)^(J + B) integrates to a Beta function; the
    // kappa monomial to (k - 1)! prod m_s! / (sum m + k - 1)!.
    const double beta = lgamma1(A - j) + lgamma1(j + B) - lgamma1(A + B + 1.0);
    const double dirichlet = lgamma1(k - 1.0) - lgamma1(j + B + k - 1.0);
    total = log_add(total, coeff[J] + beta + dirichlet);
  }
  return total;
}

double first_layer_log(std::span<const Label> g1, int k) {
  const auto sizes = sizes_of(g1, k);
  double total = std::lgamma(static_cast<double>(k)) - std::lgamma(static_cast<double>(g1.size()) + k);
  for (const int s : sizes) total += lgamma1(s);
  return total;
}

double log_prior(const CommunityAssignment& g, const PriorModel& model) {
  const int k = g.communities();
  if (std::holds_alternative<UniformAssignments>(model.kind))
    return -static_cast<double>(g.nodes()) * g.layers() * std::log(static_cast<double>(k));
  double total = first_layer_log(g.layer(0), k);
  if (std::holds_alternative<NodewiseMonolayer>(model.kind)) return total;
  for (int l = 1; l < g.layers(); ++l) {
    if (std::holds_alternative<BazziMarkov>(model.kind)) {
      total += bazzi_transition_log(g.layer(l - 1), g.layer(l), k);
    } else if (const auto* lecs = std::get_if<Lecs>(&model.kind); lecs && lecs->retention.is_random()) {
      total += lecs_transition_log(g.layer(l - 1), g.layer(l), k);
    } else {
      throw std::invalid_argument("oracle::log_prior: model not covered");
    }
  }
  return total;
}

double log_likelihood(const TemporalNetwork& A, const CommunityAssignment& g) {
  const int n = g.nodes();
  const int k = g.communities();
  double total = 0.0;
  for (int l = 0; l < g.layers(); ++l) {
    std::vector<double> pairs(static_cast<std::size_t>(k * k), 0.0);
    std::vector<double> edges(pairs.size(), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const Label a = std::min(g.at(i, l), g.at(j, l));
        const Label b = std::max(g.at(i, l), g.at(j, l));
        const auto cell = static_cast<std::size_t>(a * k + b);
        pairs[cell] += 1.0;
        if (A.adjacent(l, i, j)) edges[cell] += 1.0;
      }
    for (std::size_t c = 0; c < pairs.size(); ++c)
      total += std::lgamma(edges[c] + 1.0) + std::lgamma(pairs[c] - edges[c] + 1.0) - std::lgamma(pairs[c] + 2.0);
  }
  return total;
}

void for_each_assignment(int nodes, int layers, int communities,
                         const std::function<void(const CommunityAssignment&)>& fn) {
  const auto cells = static_cast<std::size_t>(nodes) * static_cast<std::size_t>(layers);
  std::vector<Label> digits(cells, 0);
  for (;;) {
    fn(CommunityAssignment(nodes, layers, communities, digits));
    // Increment with the last cell least significant.
    std::size_t p = cells;
    while (p > 0) {
      --p;
      if (++digits[p] < communities) break;
      digits[p] = 0;
      if (p == 0) return;
    }
    if (cells == 0) return;
  }
}

std::size_t assignment_index(const CommunityAssignment& g) {
  std::size_t index = 0;
  for (const Label v : g.labels()) index = index * static_cast<std::size_t>(g.communities()) + static_cast<std::size_t>(v);
  return index;
}

std::vector<double> enumerate_posterior(const TemporalNetwork& A, const PriorModel& model) {
  std::vector<double> logs;
  for_each_assignment(model.nodes, model.layers, model.communities, [&](const CommunityAssignment& g) {
    logs.push_back(log_prior(g, model) + log_likelihood(A, g));
  });
  const double top = *std::max_element(logs.begin(), logs.end());
  double z = 0.0;
  for (auto& v : logs) z += (v = std::exp(v - top));
  for (auto& v : logs) v /= z;
  return logs;
}

CommunityAssignment nodewise_two_stage(int nodes, int communities, Rng& rng) {
  // Sizes: choose k - 1 bar positions among n + k - 1 slots.
  const int slots = nodes + communities - 1;
  std::vector<int> positions(static_cast<std::size_t>(slots));
  std::iota(positions.begin(), positions.end(), 0);
  for (int i = 0; i < communities - 1; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.uniform_int(static_cast<std::uint64_t>(slots - i));
    std::swap(positions[static_cast<std::size_t>(i)], positions[j]);
  }
  std::vector<int> bars(positions.begin(), positions.begin() + (communities - 1));
  std::sort(bars.begin(), bars.end());
  std::vector<Label> labels;
  int previous = -1;
  for (int r = 0; r < communities; ++r) {
    const int bar = r < communities - 1 ? bars[static_cast<std::size_t>(r)] : slots;
    labels.insert(labels.end(), static_cast<std::size_t>(bar - previous - 1), static_cast<Label>(r));
    previous = bar;
  }
  // Fisher-Yates from the back.
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[rng.uniform_int(i)]);
  return CommunityAssignment::monolayer(communities, std::move(labels));
}

std::vector<double> power_iteration(const std::vector<std::vector<double>>& kernel, int iterations, double tolerance) {
  const std::size_t m = kernel.size();
  std::vector<double> v(m, 1.0 / static_cast<double>(m));
  std::vector<double> next(m);
  for (int it = 0; it < iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) next[j] += v[i] * kernel[i][j];
    double change = 0.0;
    for (std::size_t j = 0; j < m; ++j) change = std::max(change, std::abs(next[j] - v[j]));
    v.swap(next);
    if (change < tolerance) break;
  }
  return v;
}

double mann_whitney_enumerated(std::span<const double> x, std::span<const double> y) {
  const std::size_t nx = x.size();
  const std::size_t N = nx + y.size();
  if (nx == 0 || y.empty() || N > 24) throw std::invalid_argument("mann_whitney_enumerated: sizes out of range");
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  // Midranks by direct counting.
  std::vector<double> rank(N);
  for (std::size_t i = 0; i < N; ++i) {
    double below = 0.0;
    double equal = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      if (pooled[j] < pooled[i]) below += 1.0;
      if (pooled[j] == pooled[i]) equal += 1.0;
    }
    rank[i] = below + (equal + 1.0) / 2.0;
  }
  double observed = 0.0;
  for (std::size_t i = 0; i < nx; ++i) observed += rank[i];
  std::uint64_t hits = 0;
  std::uint64_t total = 0;
  for (std::uint32_t mask = 0; mask < (1u << N); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != nx) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i)
      if (mask & (1u << i)) s += rank[i];
    ++total;
    if (s >= observed - 1e-9) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

double nmi_base2(std::span<const Label> a, std::span<const Label> b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("nmi_base2: bad lengths");
  const Label ka = *std::max_element(a.begin(), a.end()) + 1;
  const Label kb = *std::max_element(b.begin(), b.end()) + 1;
  std::vector<double> joint(static_cast<std::size_t>(ka * kb), 0.0);
  std::vector<double> pa(static_cast<std::size_t>(ka), 0.0);
  std::vector<double> pb(static_cast<std::size_t>(kb), 0.0);
  const double N = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[static_cast<std::size_t>(a[i] * kb + b[i])] += 1.0;
    pa[static_cast<std::size_t>(a[i])] += 1.0;
    pb[static_cast<std::size_t>(b[i])] += 1.0;
  }
  for (auto* v : {&joint, &pa, &pb})
    for (double& p : *v) p /= N;
  double ha = 0.0;
  double hb = 0.0;
  double mi = 0.0;
  for (const double p : pa)
    if (p > 0) ha -= p * std::log2(p);
  for (const double p : pb)
    if (p > 0) hb -= p * std::log2(p);
  for (Label r = 0; r < ka; ++r)
    for (Label s = 0; s < kb; ++s) {
      const double p = joint[static_cast<std::size_t>(r * kb + s)];
      if (p > 0) mi += p * std::log2(p / (pa[static_cast<std::size_t>(r)] * pb[static_cast<std::size_t>(s)]));
    }
  if (ha + hb == 0.0) return 1.0;
  return 2.0 * mi / (ha + hb);
}

} // namespace tempcomm::oracle
