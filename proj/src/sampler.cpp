#include "tempcomm/sampler.hpp"

#include "numeric_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tempcomm {

namespace {

double log_mean_exp(std::span<double> values) {
  const double top = kernels::exponentiate(values);
  return top + std::log(kernels::sum(values) / static_cast<double>(values.size()));
}

// Bazzi statistics of a boundary from its transition counts.
void statistics_from_counts(const CountMatrix& c, std::span<std::int64_t> same, std::span<std::int64_t> move) {
  for (int s = 0; s < c.size(); ++s) {
    std::int64_t column = 0;
    for (int r = 0; r < c.size(); ++r) column += c(r, s);
    same[static_cast<std::size_t>(s)] = c(s, s);
    move[static_cast<std::size_t>(s)] = column - c(s, s);
  }
}

void check_dimensions(const TemporalNetwork& A, const PriorModel& prior) {
  prior.validate();
  if (prior.nodes != A.nodes() || prior.layers != A.layers())
    throw std::invalid_argument("sampler: prior dimensions do not match the network");
  if (std::holds_alternative<YangMarkov>(prior.kind))
    throw UnsupportedModel("sampler: the Yang prior is handled by run_yang_annealing");
}

} // namespace

void SamplerConfig::validate() const {
  prior.validate();
  mc_budget.validate();
  if (!(swap_probability >= 0.0 && swap_probability <= 1.0))
    throw std::invalid_argument("SamplerConfig: swap probability must lie in [0, 1]");
  if (sweeps < 1) throw std::invalid_argument("SamplerConfig: sweeps must be positive");
  if (thinning < 1) throw std::invalid_argument("SamplerConfig: thinning must be positive");
  if (consistency_check_interval < 0) throw std::invalid_argument("SamplerConfig: negative check interval");
}

ChainState::ChainState(const TemporalNetwork& A, const PriorModel& prior, CommunityAssignment initial,
                       const JTable* table, MonteCarloBudget budget)
    : A_(&A), prior_(prior), table_(table), budget_(budget), g_(std::move(initial)), likelihood_(A, g_),
      lf_(static_cast<std::int64_t>(A.nodes()) + prior.communities),
      draws_(prior.communities, std::holds_alternative<BazziMarkov>(prior.kind) ? budget.draws : 1) {
  check_dimensions(A, prior);
  budget_.validate();
  if (g_.nodes() != prior.nodes || g_.layers() != prior.layers || g_.communities() != prior.communities)
    throw std::invalid_argument("ChainState: initial assignment does not match the prior dimensions");

  uniform_ = std::holds_alternative<UniformAssignments>(prior.kind);
  bazzi_ = std::holds_alternative<BazziMarkov>(prior.kind);
  if (const auto* lecs = std::get_if<Lecs>(&prior.kind))
    lecs_.emplace(prior.nodes, prior.communities, lecs->retention, table_);

  const int L = g_.layers();
  const auto k = static_cast<std::size_t>(g_.communities());
  transitions_.resize(static_cast<std::size_t>(L));
  lecs_boundary_logs_.assign(static_cast<std::size_t>(L), 0.0);
  for (int l = 1; l < L; ++l) {
    transitions_[static_cast<std::size_t>(l)] = transition_counts(g_.layer(l - 1), g_.layer(l), g_.communities());
    if (lecs_) lecs_boundary_logs_[static_cast<std::size_t>(l)] = lecs_boundary_log(l);
  }

  e_.resize(k);
  lik_delta_.resize(k);
  weights_.resize(k);
  row_a_.resize(k);
  row_b_.resize(k);
  same_.resize(k);
  move_.resize(k);
  base_.resize(static_cast<std::size_t>(draws_.draws()));
}

double ChainState::lecs_boundary_log(int l) const { return lecs_->matrix_log(transitions_[static_cast<std::size_t>(l)]); }

double ChainState::log_prior(Rng& mc) const {
  const int n = g_.nodes();
  const int L = g_.layers();
  const int k = g_.communities();
  if (uniform_) return -static_cast<double>(n) * L * std::log(static_cast<double>(k));
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(k));
  for (Label r = 0; r < k; ++r) sizes[static_cast<std::size_t>(r)] = likelihood_.counts().size(0, r);
  double total = log_prob_first_layer_sizes(sizes, lf_);
  if (lecs_) {
    for (int l = 1; l < L; ++l) total += lecs_boundary_logs_[static_cast<std::size_t>(l)];
  } else if (bazzi_ && k > 1) {
    BazziDraws draws(k, budget_.draws);
    std::vector<std::int64_t> same(static_cast<std::size_t>(k));
    std::vector<std::int64_t> move(same.size());
    for (int l = 1; l < L; ++l) {
      statistics_from_counts(transitions_[static_cast<std::size_t>(l)], same, move);
      draws.redraw(mc);
      total += draws.log_estimate(same, move);
    }
  }
  return total;
}

void ChainState::full_conditional(int i, int l, Rng& mc, std::span<double> w) {
  const int k = g_.communities();
  const int L = g_.layers();
  const Label a = g_.at(i, l);
  likelihood_.neighbor_label_counts(g_, i, l, e_);
  likelihood_.move_deltas(l, a, e_, lik_delta_);
  std::copy(lik_delta_.begin(), lik_delta_.end(), w.begin());
  if (uniform_ || k == 1) return;

  if (l == 0) {
    // First-layer law: only the factor prod_r n_r! changes.
    const double na = static_cast<double>(likelihood_.counts().size(0, a));
    for (Label b = 0; b < k; ++b)
      if (b != a) w[static_cast<std::size_t>(b)] += std::log(static_cast<double>(likelihood_.counts().size(0, b)) + 1.0) - std::log(na);
  }

  if (lecs_) {
    if (l >= 1) {
      // Boundary into layer l: only the row of the node's previous label moves.
      const Label p = g_.at(i, l - 1);
      const auto row = transitions_[static_cast<std::size_t>(l)].row(p);
      std::copy(row.begin(), row.end(), row_a_.begin());
      const double before = lecs_->row_log(row_a_, p);
      --row_a_[static_cast<std::size_t>(a)];
      for (Label b = 0; b < k; ++b) {
        if (b == a) continue;
        ++row_a_[static_cast<std::size_t>(b)];
        w[static_cast<std::size_t>(b)] += lecs_->row_log(row_a_, p) - before;
        --row_a_[static_cast<std::size_t>(b)];
      }
    }
    if (l + 1 < L) {
      // Boundary out of layer l: rows a and b exchange one node of column q.
      const Label q = g_.at(i, l + 1);
      const auto& c = transitions_[static_cast<std::size_t>(l + 1)];
      std::copy(c.row(a).begin(), c.row(a).end(), row_a_.begin());
      const double before_a = lecs_->row_log(row_a_, a);
      --row_a_[static_cast<std::size_t>(q)];
      const double change_a = lecs_->row_log(row_a_, a) - before_a;
      for (Label b = 0; b < k; ++b) {
        if (b == a) continue;
        std::copy(c.row(b).begin(), c.row(b).end(), row_b_.begin());
        const double before_b = lecs_->row_log(row_b_, b);
        ++row_b_[static_cast<std::size_t>(q)];
        w[static_cast<std::size_t>(b)] += change_a + lecs_->row_log(row_b_, b) - before_b;
      }
    }
  } else if (bazzi_) {
    // Common draws for all candidates of a boundary: each candidate scales the
    // per-draw integrand of the other node-layers by one linear factor.
    const double scale = static_cast<double>(draws_.draws());
    if (l >= 1) {
      const Label p = g_.at(i, l - 1);
      statistics_from_counts(transitions_[static_cast<std::size_t>(l)], same_, move_);
      --(p == a ? same_ : move_)[static_cast<std::size_t>(a)];
      draws_.redraw(mc);
      draws_.log_integrands(same_, move_, base_);
      const double top = kernels::exponentiate(base_);
      for (Label b = 0; b < k; ++b) {
        const double sum = kernels::dot(base_, p == b ? draws_.same_factors(b) : draws_.move_factors(b));
        weights_[static_cast<std::size_t>(b)] = top + std::log(sum / scale);
      }
      const double current = weights_[static_cast<std::size_t>(a)];
      for (Label b = 0; b < k; ++b) w[static_cast<std::size_t>(b)] += weights_[static_cast<std::size_t>(b)] - current;
    }
    if (l + 1 < L) {
      const Label q = g_.at(i, l + 1);
      statistics_from_counts(transitions_[static_cast<std::size_t>(l + 1)], same_, move_);
      --(a == q ? same_ : move_)[static_cast<std::size_t>(q)];
      draws_.redraw(mc);
      draws_.log_integrands(same_, move_, base_);
      kernels::exponentiate(base_);
      const double stays = std::log(kernels::dot(base_, draws_.same_factors(q)));
      const double moves = std::log(kernels::dot(base_, draws_.move_factors(q)));
      const double current = a == q ? stays : moves;
      for (Label b = 0; b < k; ++b) w[static_cast<std::size_t>(b)] += (b == q ? stays : moves) - current;
    }
  }
}

Label ChainState::gibbs_update(int i, int l, Rng& rng, Rng& mc) {
  const int k = g_.communities();
  const Label a = g_.at(i, l);
  if (k == 1) return a;
  full_conditional(i, l, mc, weights_);
  const double top = *std::max_element(weights_.begin(), weights_.end());
  for (auto& v : weights_) v = std::exp(v - top);
  const auto b = static_cast<Label>(rng.categorical(weights_));
  if (b != a) update_caches_after_move(i, l, a, b, e_, lik_delta_[static_cast<std::size_t>(b)]);
  return b;
}

void ChainState::update_caches_after_move(int i, int l, Label a, Label b, std::span<const std::int64_t> e,
                                          double delta_lik) {
  const int L = g_.layers();
  g_.set(i, l, b);
  likelihood_.apply_move(l, a, b, e, delta_lik);
  likelihood_.set_source_fingerprint(g_.fingerprint());
  if (l >= 1) {
    auto& c = transitions_[static_cast<std::size_t>(l)];
    const Label p = g_.at(i, l - 1);
    --c(p, a);
    ++c(p, b);
    if (lecs_) lecs_boundary_logs_[static_cast<std::size_t>(l)] = lecs_boundary_log(l);
  }
  if (l + 1 < L) {
    auto& c = transitions_[static_cast<std::size_t>(l + 1)];
    const Label q = g_.at(i, l + 1);
    --c(a, q);
    ++c(b, q);
    if (lecs_) lecs_boundary_logs_[static_cast<std::size_t>(l + 1)] = lecs_boundary_log(l + 1);
  }
}

double ChainState::bazzi_swap_log_ratio(int l0, Label r, Label s, Rng& mc) {
  CountMatrix swapped = transitions_[static_cast<std::size_t>(l0)];
  statistics_from_counts(swapped, same_, move_);
  draws_.redraw(mc);
  draws_.log_integrands(same_, move_, base_);
  const double current = log_mean_exp(base_);
  swapped.swap_columns(r, s);
  statistics_from_counts(swapped, same_, move_);
  draws_.log_integrands(same_, move_, base_);
  return log_mean_exp(base_) - current;
}

double ChainState::swap_log_acceptance(Label r, Label s, int l0, Rng& mc) {
  const int k = g_.communities();
  if (r < 0 || s < 0 || r >= k || s >= k) throw std::invalid_argument("swap: label outside [k]");
  if (l0 < 0 || l0 >= g_.layers()) throw std::invalid_argument("swap: layer out of range");
  // The likelihood is label-invariant within layers, and every prior here is
  // invariant under relabelling all layers at once, so only the boundary
  // straddling l0 can change.
  if (r == s || l0 == 0 || uniform_) return 0.0;
  if (lecs_) {
    CountMatrix swapped = transitions_[static_cast<std::size_t>(l0)];
    swapped.swap_columns(r, s);
    return lecs_->matrix_log(swapped) - lecs_boundary_logs_[static_cast<std::size_t>(l0)];
  }
  if (bazzi_) return bazzi_swap_log_ratio(l0, r, s, mc);
  return 0.0;
}

void ChainState::apply_swap(Label r, Label s, int l0) {
  if (r == s) return;
  g_.swap_labels(r, s, l0);
  likelihood_.swap_labels(r, s, l0);
  likelihood_.set_source_fingerprint(g_.fingerprint());
  for (int l = std::max(l0, 1); l < g_.layers(); ++l) {
    auto& c = transitions_[static_cast<std::size_t>(l)];
    c.swap_columns(r, s);
    if (l > l0) c.swap_rows(r, s);
  }
  if (lecs_ && l0 >= 1) lecs_boundary_logs_[static_cast<std::size_t>(l0)] = lecs_boundary_log(l0);
}

ChainState::SwapOutcome ChainState::multilayer_swap(Rng& rng, Rng& mc) {
  const int k = g_.communities();
  if (k < 2) throw std::invalid_argument("multilayer_swap: needs k >= 2");
  SwapOutcome out;
  out.r = static_cast<Label>(rng.uniform_int(static_cast<std::uint64_t>(k)));
  out.s = static_cast<Label>(rng.uniform_int(static_cast<std::uint64_t>(k - 1)));
  if (out.s >= out.r) ++out.s;
  out.first_layer = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(g_.layers())));
  const double log_ratio = swap_log_acceptance(out.r, out.s, out.first_layer, mc);
  const double u = rng.uniform();
  out.accepted = log_ratio >= 0.0 || std::log(u) < log_ratio;
  if (out.accepted) apply_swap(out.r, out.s, out.first_layer);
  return out;
}

void ChainState::check_consistency() const {
  likelihood_.check_consistency(g_);
  if (likelihood_.counts().source_fingerprint() != g_.fingerprint())
    throw InvariantViolation("ChainState: block counts carry a stale fingerprint");
  for (int l = 1; l < g_.layers(); ++l) {
    if (!(transitions_[static_cast<std::size_t>(l)] == transition_counts(g_.layer(l - 1), g_.layer(l), g_.communities())))
      throw InvariantViolation("ChainState: cached transition counts differ at boundary " + std::to_string(l));
    if (lecs_ && std::abs(lecs_boundary_logs_[static_cast<std::size_t>(l)] - lecs_boundary_log(l)) > 1e-9)
      throw InvariantViolation("ChainState: cached LECS boundary term differs at boundary " + std::to_string(l));
  }
}

ChainStreams::ChainStreams(std::uint64_t seed)
    : init(Rng::substream(seed, {1})), decision(Rng::substream(seed, {2})), gibbs(Rng::substream(seed, {3})),
      swap(Rng::substream(seed, {4})), monte_carlo(Rng::substream(seed, {5})), diagnostics(Rng::substream(seed, {6})) {}

JTable table_for(int nodes) { return JTable(std::max(nodes, 1)); }

ChainResult run_chain(const TemporalNetwork& A, const SamplerConfig& config, const JTable* table,
                      const ChainCallbacks& callbacks) {
  config.validate();
  check_dimensions(A, config.prior);
  ChainStreams streams(config.seed);
  CommunityAssignment start = config.initial ? *config.initial : sample_prior(config.prior, streams.init);
  ChainState state(A, config.prior, std::move(start), table, config.mc_budget);

  const int n = A.nodes();
  const int L = A.layers();
  const int k = config.prior.communities;
  const int burn_in = config.effective_burn_in();
  const double p = config.swap_probability;

  ChainResult result;
  std::int64_t visits = 0;
  for (int sweep = 1; sweep <= config.sweeps; ++sweep) {
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < L; ++l) {
        if (p > 0.0 && streams.decision.uniform() < p) {
          if (k >= 2) {
            const auto outcome = state.multilayer_swap(streams.swap, streams.monte_carlo);
            ++result.diagnostics.swap_proposals;
            if (outcome.accepted) ++result.diagnostics.swap_accepts;
          }
        } else {
          state.gibbs_update(i, l, streams.gibbs, streams.monte_carlo);
          ++result.diagnostics.gibbs_updates;
        }
        ++visits;
        if (config.consistency_check_interval > 0 && visits % config.consistency_check_interval == 0)
          state.check_consistency();
      }

    const double log_post = state.log_posterior(streams.diagnostics);
    result.diagnostics.log_posterior_trace.push_back(log_post);
    if (callbacks.on_trace) callbacks.on_trace(TraceRecord{sweep, log_post, &state.assignment()});

    if (sweep > burn_in && (sweep - burn_in) % config.thinning == 0) {
      if (callbacks.on_sample) {
        callbacks.on_sample(state.assignment(), sweep);
      } else {
        result.samples.push_back(state.assignment());
      }
      result.sample_sweeps.push_back(sweep);
    }
  }
  result.final_state = state.assignment();
  return result;
}

} // namespace tempcomm
