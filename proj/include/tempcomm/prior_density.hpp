#pragma once

// Log-densities of the assignment priors and their layer-transition terms.
//
// J(k1, k2) = int_0^1 x^k1 (x - 1) / (x^(k2+1) - 1) dx is the probability
// that a community of size k2 under random retention sends exactly k1 nodes
// elsewhere.

#include "tempcomm/core.hpp"
#include "tempcomm/priors.hpp"
#include "tempcomm/random.hpp"

#include <span>
#include <vector>

namespace tempcomm {

/// psi(x) for x > 0. Upward recurrence to x >= 10, then the asymptotic
/// Bernoulli series.
double digamma(double x);

/// J via (psi((k1+2)/(k2+1)) - psi((k1+1)/(k2+1))) / (k2+1).
/// Throws std::invalid_argument unless 0 <= k1 <= k2.
double compute_J_digamma(int k1, int k2);

/// J via partial fractions over the non-unit (k2+1)-th roots of unity. The
/// diagonal k1 = k2 uses the column-sum identity. Slow and ill-conditioned
/// for large k2; kept as an independent cross-check.
double compute_J_partial_fractions(int k1, int k2);

/// Triangular table of J(k1, k2) for 0 <= k1 <= k2 <= n_max, floored.
class JTable {
public:
  static double default_floor();

  JTable() = default;
  /// Fills from compute_J_digamma.
  explicit JTable(int n_max);
  /// Rebuilds from persisted values (row k2 stores k1 = 0..k2). Validates
  /// the layout and that every entry lies in [floor, 1].
  static JTable from_values(int n_max, double floor, std::vector<double> values);

  int n_max() const { return n_max_; }
  double floor() const { return floor_; }
  double value(int k1, int k2) const { return values_[offset(k1, k2)]; }
  double log_value(int k1, int k2) const { return logs_[offset(k1, k2)]; }
  std::span<const double> values() const { return values_; }

private:
  std::size_t offset(int k1, int k2) const {
    if (k1 < 0 || k1 > k2 || k2 > n_max_)
      throw std::out_of_range("JTable: (" + std::to_string(k1) + ", " + std::to_string(k2) + ") outside table");
    return static_cast<std::size_t>(k2) * (static_cast<std::size_t>(k2) + 1) / 2 + static_cast<std::size_t>(k1);
  }
  void fill_logs();

  int n_max_ = -1;
  double floor_ = 0.0;
  std::vector<double> values_;
  std::vector<double> logs_;
};

JTable build_J_table(int n_max);

struct MonteCarloBudget {
  int draws = 1000;
  void validate() const {
    if (draws < 1) throw std::invalid_argument("MonteCarloBudget: draws must be positive");
  }
};

/// log of the nodewise first-layer law: prod_r n_r! / (n! C(k+n-1, n)).
LogProb log_prob_first_layer(std::span<const Label> g1, int communities);
double log_prob_first_layer_sizes(std::span<const std::int64_t> sizes, const LogFactorials& lf);

/// Per-row LECS transition terms. One instance per (n, k, retention); the
/// table is borrowed and must outlive it.
class LecsTransition {
public:
  LecsTransition(int nodes, int communities, RetentionMode retention, const JTable* table);

  /// log P(row r of the transition counts | n_r = row sum). Empty rows give 0.
  double row_log(std::span<const std::int64_t> row, Label r) const;
  /// Sum of row_log over a full transition-count matrix.
  double matrix_log(const CountMatrix& counts) const;

  int communities() const { return communities_; }
  const LogFactorials& log_factorials() const { return lf_; }

private:
  double retention_log(std::int64_t movers, std::int64_t size) const;

  int communities_;
  RetentionMode retention_;
  const JTable* table_;
  LogFactorials lf_;
};

LogProb lecs_transition_logprob(std::span<const Label> g_prev, std::span<const Label> g_cur, int communities,
                                const JTable& table);
LogProb lecs_transition_logprob(std::span<const Label> g_prev, std::span<const Label> g_cur, int communities,
                                const JTable& table, const RetentionMode& retention);

/// Monte Carlo draws of (alpha, kappa) for the Bazzi transition integral.
///
/// With same_s = #{i : prev_i = cur_i = s} and move_s = #{i : cur_i = s,
/// prev_i != s}, one draw contributes
///   sum_s same_s log(alpha + (1-alpha) kappa_s) + move_s log((1-alpha) kappa_s).
class BazziDraws {
public:
  BazziDraws(int communities, int draws);

  void redraw(Rng& rng);

  int communities() const { return communities_; }
  int draws() const { return draws_; }
  double log_same(int d, Label s) const { return log_same_[cell(d, s)]; }
  double log_move(int d, Label s) const { return log_move_[cell(d, s)]; }
  /// alpha + (1 - alpha) kappa_s and (1 - alpha) kappa_s over all draws.
  std::span<const double> same_factors(Label s) const { return column(same_, s); }
  std::span<const double> move_factors(Label s) const { return column(move_, s); }

  /// Per-draw log integrand for the given statistics, written to `out`.
  void log_integrands(std::span<const std::int64_t> same, std::span<const std::int64_t> move,
                      std::span<double> out) const;
  /// log of the mean over draws of exp(log integrand).
  double log_estimate(std::span<const std::int64_t> same, std::span<const std::int64_t> move) const;

private:
  std::size_t cell(int d, Label s) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(draws_) + static_cast<std::size_t>(d);
  }
  std::span<const double> column(const std::vector<double>& v, Label s) const {
    return std::span<const double>(v).subspan(cell(0, s), static_cast<std::size_t>(draws_));
  }
  int communities_;
  int draws_;
  std::vector<double> alpha_;
  std::vector<double> kappa_;
  std::vector<double> log_same_;
  std::vector<double> log_move_;
  std::vector<double> same_;
  std::vector<double> move_;
};

/// Fills same/move statistics (each of length k) for one boundary.
void bazzi_statistics(std::span<const Label> g_prev, std::span<const Label> g_cur, std::span<std::int64_t> same,
                      std::span<std::int64_t> move);

LogProb bazzi_transition_logprob(std::span<const Label> g_prev, std::span<const Label> g_cur, int communities,
                                 const MonteCarloBudget& budget, Rng& rng);

/// Raised for priors whose joint density is not available in closed form.
class UnsupportedModel : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// log P(g). Uniform and nodewise are exact; LECS is exact given the table
/// (which must cover n); Bazzi is a Monte Carlo estimate; Yang throws
/// UnsupportedModel.
LogProb log_prob_assignment(const CommunityAssignment& g, const PriorModel& model, const JTable& table,
                            const MonteCarloBudget& budget, Rng& rng);

} // namespace tempcomm
