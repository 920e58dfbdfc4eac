#include "tempcomm/prior_density.hpp"

#include "numeric_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace tempcomm {

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: argument must be positive");
  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  // psi(x) ~ ln x - 1/(2x) - sum_n B_2n / (2n x^2n)
  const double w = 1.0 / (x * x);
  const double series =
      w * (1.0 / 12 - w * (1.0 / 120 - w * (1.0 / 252 - w * (1.0 / 240 - w * (1.0 / 132 - w * (691.0 / 32760 - w / 12))))));
  return shift + std::log(x) - 0.5 / x - series;
}

double compute_J_digamma(int k1, int k2) {
  if (k1 < 0 || k1 > k2) throw std::invalid_argument("compute_J: need 0 <= k1 <= k2");
  const double h = 1.0 / (k2 + 1.0);
  return h * (digamma((k1 + 2) * h) - digamma((k1 + 1) * h));
}

namespace {

double partial_fraction_term(int k1, int k2) {
  using C = std::complex<double>;
  std::vector<C> roots;
  roots.reserve(static_cast<std::size_t>(k2));
  for (int r = 1; r <= k2; ++r) roots.push_back(std::polar(1.0, 2.0 * std::numbers::pi * r / (k2 + 1)));
  C total{0.0, 0.0};
  for (std::size_t r = 0; r < roots.size(); ++r) {
    C denominator{1.0, 0.0};
    for (std::size_t s = 0; s < roots.size(); ++s)
      if (s != r) denominator *= roots[r] - roots[s];
    const C coefficient = std::pow(roots[r], k1) / denominator;
    total += coefficient * (std::log(1.0 - roots[r]) - std::log(-roots[r]));
  }
  if (std::abs(total.imag()) > 1e-8)
    throw std::runtime_error("compute_J_partial_fractions: imaginary residue " + std::to_string(total.imag()));
  return total.real();
}

} // namespace

double compute_J_partial_fractions(int k1, int k2) {
  if (k1 < 0 || k1 > k2) throw std::invalid_argument("compute_J: need 0 <= k1 <= k2");
  if (k2 == 0) return 1.0;
  if (k1 < k2) return partial_fraction_term(k1, k2);
  double rest = 0.0;
  for (int j = 0; j < k2; ++j) rest += partial_fraction_term(j, k2);
  return 1.0 - rest;
}

double JTable::default_floor() { return std::exp(-16.0); }

JTable::JTable(int n_max) : n_max_(n_max), floor_(default_floor()) {
  if (n_max < 1) throw std::invalid_argument("JTable: n_max must be positive");
  values_.reserve(static_cast<std::size_t>(n_max + 1) * static_cast<std::size_t>(n_max + 2) / 2);
  for (int k2 = 0; k2 <= n_max; ++k2)
    for (int k1 = 0; k1 <= k2; ++k1) values_.push_back(std::max(compute_J_digamma(k1, k2), floor_));
  fill_logs();
}

JTable JTable::from_values(int n_max, double floor, std::vector<double> values) {
  if (n_max < 1) throw std::invalid_argument("JTable: n_max must be positive");
  const auto expected = static_cast<std::size_t>(n_max + 1) * static_cast<std::size_t>(n_max + 2) / 2;
  if (values.size() != expected)
    throw std::invalid_argument("JTable: expected " + std::to_string(expected) + " values, got " +
                                std::to_string(values.size()));
  if (!(floor > 0.0 && floor < 1.0)) throw std::invalid_argument("JTable: floor must lie in (0, 1)");
  for (const double v : values)
    if (!(v >= floor && v <= 1.0)) throw std::invalid_argument("JTable: entry outside [floor, 1]");
  JTable table;
  table.n_max_ = n_max;
  table.floor_ = floor;
  table.values_ = std::move(values);
  table.fill_logs();
  return table;
}

void JTable::fill_logs() {
  logs_.resize(values_.size());
  std::transform(values_.begin(), values_.end(), logs_.begin(), [](double v) { return std::log(v); });
}

JTable build_J_table(int n_max) { return JTable(n_max); }

double log_prob_first_layer_sizes(std::span<const std::int64_t> sizes, const LogFactorials& lf) {
  const auto k = static_cast<std::int64_t>(sizes.size());
  std::int64_t n = 0;
  double log_value = 0.0;
  for (const auto size : sizes) {
    n += size;
    log_value += lf(size);
  }
  return log_value - lf(n) - lf.log_binomial(k + n - 1, n);
}

LogProb log_prob_first_layer(std::span<const Label> g1, int communities) {
  if (communities < 1) throw std::invalid_argument("log_prob_first_layer: k must be positive");
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(communities), 0);
  for (const Label r : g1) {
    if (r < 0 || r >= communities) throw std::invalid_argument("log_prob_first_layer: label outside [k]");
    ++sizes[static_cast<std::size_t>(r)];
  }
  const LogFactorials lf(static_cast<std::int64_t>(g1.size()) + communities);
  return LogProb::from_log(log_prob_first_layer_sizes(sizes, lf));
}

LecsTransition::LecsTransition(int nodes, int communities, RetentionMode retention, const JTable* table)
    : communities_(communities), retention_(retention), table_(table), lf_(nodes + communities) {
  if (nodes < 1 || communities < 1) throw std::invalid_argument("LecsTransition: n and k must be positive");
  if (retention_.is_random() && communities > 1 && (table_ == nullptr || table_->n_max() < nodes))
    throw std::invalid_argument("LecsTransition: J table must cover community sizes up to n");
}

double LecsTransition::retention_log(std::int64_t movers, std::int64_t size) const {
  if (retention_.is_random()) return table_->log_value(static_cast<int>(movers), static_cast<int>(size));
  const double p = retention_.fixed_probability();
  if (p == 0.0) return movers == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (p == 1.0) return -std::log(static_cast<double>(size + 1));
  const double log_p = std::log(p);
  return static_cast<double>(movers) * log_p + std::log1p(-p) - std::log(-std::expm1(static_cast<double>(size + 1) * log_p));
}

double LecsTransition::row_log(std::span<const std::int64_t> row, Label r) const {
  if (communities_ == 1) return 0.0;
  std::int64_t size = 0;
  double labelling = 0.0;
  for (const auto c : row) {
    size += c;
    labelling += lf_(c);
  }
  if (size == 0) return 0.0;
  const std::int64_t movers = size - row[static_cast<std::size_t>(r)];
  labelling -= lf_(size);
  return retention_log(movers, size) - lf_.log_binomial(movers + communities_ - 2, movers) + labelling;
}

double LecsTransition::matrix_log(const CountMatrix& counts) const {
  double total = 0.0;
  for (int r = 0; r < counts.size(); ++r) total += row_log(counts.row(r), r);
  return total;
}

LogProb lecs_transition_logprob(std::span<const Label> g_prev, std::span<const Label> g_cur, int communities,
                                const JTable& table, const RetentionMode& retention) {
  const CountMatrix counts = transition_counts(g_prev, g_cur, communities);
  const LecsTransition lecs(static_cast<int>(std::max<std::size_t>(g_prev.size(), 1)), communities, retention, &table);
  return LogProb::from_log(lecs.matrix_log(counts));
}

LogProb lecs_transition_logprob(std::span<const Label> g_prev, std::span<const Label> g_cur, int communities,
                                const JTable& table) {
  return lecs_transition_logprob(g_prev, g_cur, communities, table, RetentionMode::random());
}

BazziDraws::BazziDraws(int communities, int draws) : communities_(communities), draws_(draws) {
  if (communities < 1 || draws < 1) throw std::invalid_argument("BazziDraws: k and draws must be positive");
  const std::size_t cells = static_cast<std::size_t>(communities) * static_cast<std::size_t>(draws);
  alpha_.resize(static_cast<std::size_t>(draws));
  kappa_.resize(cells);
  log_same_.resize(cells);
  log_move_.resize(cells);
  same_.resize(cells);
  move_.resize(cells);
}

void BazziDraws::redraw(Rng& rng) {
  // kappa ~ Dir(1, ..., 1) as the spacings of k - 1 sorted uniforms.
  const auto k = static_cast<std::size_t>(communities_);
  std::vector<double> cuts(k + 1);
  for (int d = 0; d < draws_; ++d) {
    alpha_[static_cast<std::size_t>(d)] = rng.uniform();
    cuts[0] = 0.0;
    cuts[k] = 1.0;
    for (std::size_t j = 1; j < k; ++j) cuts[j] = rng.uniform_open();
    std::sort(cuts.begin() + 1, cuts.end() - 1);
    for (std::size_t s = 0; s < k; ++s)
      kappa_[cell(d, static_cast<Label>(s))] = std::max(cuts[s + 1] - cuts[s], std::numeric_limits<double>::min());
  }
  const auto D = static_cast<std::size_t>(draws_);
  for (std::size_t s = 0; s < k; ++s) {
    const std::size_t at = s * D;
    kernels::bazzi_factors(alpha_, std::span<const double>(kappa_).subspan(at, D), std::span(same_).subspan(at, D),
                           std::span(move_).subspan(at, D), std::span(log_same_).subspan(at, D),
                           std::span(log_move_).subspan(at, D));
  }
}

void BazziDraws::log_integrands(std::span<const std::int64_t> same, std::span<const std::int64_t> move,
                                std::span<double> out) const {
  const auto D = static_cast<std::size_t>(draws_);
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(D), 0.0);
  for (int s = 0; s < communities_; ++s) {
    const auto su = static_cast<std::size_t>(s);
    if (same[su] != 0) kernels::add_scaled(out.first(D), static_cast<double>(same[su]), column(log_same_, s));
    if (move[su] != 0) kernels::add_scaled(out.first(D), static_cast<double>(move[su]), column(log_move_, s));
  }
}

double BazziDraws::log_estimate(std::span<const std::int64_t> same, std::span<const std::int64_t> move) const {
  std::vector<double> scratch(static_cast<std::size_t>(draws_));
  log_integrands(same, move, scratch);
  const double top = kernels::exponentiate(scratch);
  return top + std::log(kernels::sum(scratch) / static_cast<double>(draws_));
}

void bazzi_statistics(std::span<const Label> g_prev, std::span<const Label> g_cur, std::span<std::int64_t> same,
                      std::span<std::int64_t> move) {
  if (g_prev.size() != g_cur.size()) throw std::invalid_argument("bazzi_statistics: layer length mismatch");
  std::fill(same.begin(), same.end(), 0);
  std::fill(move.begin(), move.end(), 0);
  for (std::size_t i = 0; i < g_cur.size(); ++i) {
    const auto s = static_cast<std::size_t>(g_cur[i]);
    if (s >= same.size()) throw std::invalid_argument("bazzi_statistics: label outside [k]");
    ++(g_prev[i] == g_cur[i] ? same[s] : move[s]);
  }
}

LogProb bazzi_transition_logprob(std::span<const Label> g_prev, std::span<const Label> g_cur, int communities,
                                 const MonteCarloBudget& budget, Rng& rng) {
  budget.validate();
  if (communities < 1) throw std::invalid_argument("bazzi_transition_logprob: k must be positive");
  std::vector<std::int64_t> same(static_cast<std::size_t>(communities));
  std::vector<std::int64_t> move(same.size());
  bazzi_statistics(g_prev, g_cur, same, move);
  if (communities == 1) return LogProb::one();
  BazziDraws draws(communities, budget.draws);
  draws.redraw(rng);
  return LogProb::from_log(draws.log_estimate(same, move));
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

LogProb log_prob_assignment(const CommunityAssignment& g, const PriorModel& model, const JTable& table,
                            const MonteCarloBudget& budget, Rng& rng) {
  model.validate();
  if (g.nodes() != model.nodes || g.layers() != model.layers || g.communities() != model.communities)
    throw std::invalid_argument("log_prob_assignment: assignment dimensions do not match the model");
  const int n = g.nodes();
  const int L = g.layers();
  const int k = g.communities();
  return std::visit(
      overloaded{
          [&](const UniformAssignments&) {
            return LogProb::from_log(-static_cast<double>(n) * L * std::log(static_cast<double>(k)));
          },
          [&](const NodewiseMonolayer&) { return log_prob_first_layer(g.layer(0), k); },
          [&](const YangMarkov&) -> LogProb {
            throw UnsupportedModel("log_prob_assignment: the Yang prior has no closed-form joint density here");
          },
          [&](const BazziMarkov&) {
            LogProb total = log_prob_first_layer(g.layer(0), k);
            for (int l = 1; l < L; ++l) total *= bazzi_transition_logprob(g.layer(l - 1), g.layer(l), k, budget, rng);
            return total;
          },
          [&](const Lecs& lecs) {
            LogProb total = log_prob_first_layer(g.layer(0), k);
            const LecsTransition transition(n, k, lecs.retention, &table);
            for (int l = 1; l < L; ++l)
              total *= LogProb::from_log(transition.matrix_log(transition_counts(g.layer(l - 1), g.layer(l), k)));
            return total;
          },
      },
      model.kind);
}

} // namespace tempcomm
