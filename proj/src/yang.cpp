#include "tempcomm/sampler.hpp"

#include <algorithm>
#include <cmath>

namespace tempcomm {

AnnealingSchedule default_annealing_schedule() {
  return {{1.0, 20}, {0.9, 10}, {0.8, 10}, {0.7, 10}, {0.6, 10}, {0.5, 10}, {0.4, 10}, {0.3, 5}, {0.2, 5}, {0.1, 5}};
}

void validate_schedule(const AnnealingSchedule& schedule) {
  if (schedule.empty()) throw std::invalid_argument("annealing schedule is empty");
  double previous = std::numeric_limits<double>::infinity();
  for (const auto& stage : schedule) {
    if (!(stage.temperature > 0.0)) throw std::invalid_argument("annealing temperatures must be positive");
    if (stage.temperature > previous) throw std::invalid_argument("annealing temperatures must be non-increasing");
    if (stage.sweeps < 0) throw std::invalid_argument("annealing sweep counts must be non-negative");
    previous = stage.temperature;
  }
}

namespace {

std::int64_t factorial_bound(const TemporalNetwork& A, int k) {
  const std::int64_t n = A.nodes();
  const std::int64_t L = A.layers();
  return std::max({likelihood_factorial_bound(A.nodes(), A.layers()), n * L + k, n + k});
}

} // namespace

YangState::YangState(const TemporalNetwork& A, CommunityAssignment initial)
    : A_(&A), g_(std::move(initial)), k_(g_.communities()), lf_(factorial_bound(A, g_.communities())),
      layers_(A, g_), pooled_m_(k_), pooled_t_(k_), pooled_transitions_(k_) {
  if (A.nodes() != g_.nodes() || A.layers() != g_.layers())
    throw std::invalid_argument("YangState: network and assignment dimensions differ");
  const auto& c = layers_.counts();
  for (int l = 0; l < g_.layers(); ++l)
    for (Label r = 0; r < k_; ++r)
      for (Label s = 0; s < k_; ++s) {
        pooled_m_(r, s) += c.m(l, r, s);
        pooled_t_(r, s) += c.t(l, r, s);
      }
  for (int l = 1; l < g_.layers(); ++l) {
    const CountMatrix t = transition_counts(g_.layer(l - 1), g_.layer(l), k_);
    for (Label r = 0; r < k_; ++r)
      for (Label s = 0; s < k_; ++s) pooled_transitions_(r, s) += t(r, s);
  }
  e_.resize(static_cast<std::size_t>(k_));
  weights_.resize(static_cast<std::size_t>(k_));
}

double YangState::log_likelihood() const {
  double total = 0.0;
  for (Label r = 0; r < k_; ++r)
    for (Label s = r; s < k_; ++s) total += block_pair_log_term(lf_, pooled_m_(r, s), pooled_t_(r, s));
  return total;
}

double YangState::log_prior() const {
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(k_));
  for (Label r = 0; r < k_; ++r) sizes[static_cast<std::size_t>(r)] = layers_.counts().size(0, r);
  double total = log_prob_first_layer_sizes(sizes, lf_);
  // Each kernel row integrated against Dir(1): (k-1)! prod_r N_sr! / (N_s + k - 1)!.
  for (Label s = 0; s < k_; ++s) {
    std::int64_t row = 0;
    total += lf_(k_ - 1);
    for (Label r = 0; r < k_; ++r) {
      row += pooled_transitions_(s, r);
      total += lf_(pooled_transitions_(s, r));
    }
    total -= lf_(row + k_ - 1);
  }
  return total;
}

double YangState::pooled_pair_term(Label r, Label s, std::int64_t dm, std::int64_t dt) const {
  return block_pair_log_term(lf_, pooled_m_(r, s) + dm, pooled_t_(r, s) + dt) -
         block_pair_log_term(lf_, pooled_m_(r, s), pooled_t_(r, s));
}

double YangState::likelihood_delta(int l, Label a, Label b) const {
  if (a == b) return 0.0;
  const auto& c = layers_.counts();
  const std::int64_t na = c.size(l, a);
  const std::int64_t nb = c.size(l, b);
  const auto ea = e_[static_cast<std::size_t>(a)];
  const auto eb = e_[static_cast<std::size_t>(b)];
  double delta = pooled_pair_term(a, a, -ea, -(na - 1)) + pooled_pair_term(b, b, eb, nb) +
                 pooled_pair_term(a, b, ea - eb, na - nb - 1);
  for (Label x = 0; x < k_; ++x) {
    if (x == a || x == b) continue;
    const auto ex = e_[static_cast<std::size_t>(x)];
    const std::int64_t nx = c.size(l, x);
    delta += pooled_pair_term(a, x, -ex, -nx) + pooled_pair_term(b, x, ex, nx);
  }
  return delta;
}

double YangState::prior_delta(int i, int l, Label a, Label b) {
  if (a == b) return 0.0;
  double delta = 0.0;
  if (l == 0)
    delta += std::log(static_cast<double>(layers_.counts().size(0, b)) + 1.0) -
             std::log(static_cast<double>(layers_.counts().size(0, a)));
  auto& N = pooled_transitions_;
  auto row_sum = [&N, this](Label r) {
    std::int64_t total = 0;
    for (Label s = 0; s < k_; ++s) total += N(r, s);
    return total;
  };
  // Both boundaries touch the same pooled matrix, so changes are applied in
  // turn and rolled back afterwards.
  Label p = -1;
  if (l >= 1) {
    p = g_.at(i, l - 1);
    delta += lf_(N(p, a) - 1) - lf_(N(p, a));
    --N(p, a);
    delta += lf_(N(p, b) + 1) - lf_(N(p, b));
    ++N(p, b);
  }
  if (l + 1 < g_.layers()) {
    const Label q = g_.at(i, l + 1);
    const std::int64_t sum_a = row_sum(a);
    delta += lf_(N(a, q) - 1) - lf_(N(a, q)) - (lf_(sum_a - 1 + k_ - 1) - lf_(sum_a + k_ - 1));
    --N(a, q);
    const std::int64_t sum_b = row_sum(b);
    delta += lf_(N(b, q) + 1) - lf_(N(b, q)) - (lf_(sum_b + 1 + k_ - 1) - lf_(sum_b + k_ - 1));
    ++N(a, q);
  }
  if (p >= 0) {
    ++N(p, a);
    --N(p, b);
  }
  return delta;
}

void YangState::full_conditional(int i, int l, std::span<double> w) {
  const Label a = g_.at(i, l);
  layers_.neighbor_label_counts(g_, i, l, e_);
  for (Label b = 0; b < k_; ++b) w[static_cast<std::size_t>(b)] = likelihood_delta(l, a, b) + prior_delta(i, l, a, b);
}

void YangState::apply(int i, int l, Label a, Label b) {
  const int L = g_.layers();
  const auto& c = layers_.counts();
  // Remove layer l's contribution for pairs touching a or b, move, add back.
  auto touch = [&](int sign) {
    for (Label x = 0; x < k_; ++x)
      for (const Label y : {a, b}) {
        pooled_m_(x, y) += sign * c.m(l, x, y);
        pooled_t_(x, y) += sign * c.t(l, x, y);
        if (x != a && x != b) {
          pooled_m_(y, x) += sign * c.m(l, y, x);
          pooled_t_(y, x) += sign * c.t(l, y, x);
        }
      }
  };
  touch(-1);
  layers_.apply_move(l, a, b, e_, 0.0);
  touch(+1);
  g_.set(i, l, b);
  layers_.set_source_fingerprint(g_.fingerprint());
  if (l >= 1) {
    const Label p = g_.at(i, l - 1);
    --pooled_transitions_(p, a);
    ++pooled_transitions_(p, b);
  }
  if (l + 1 < L) {
    const Label q = g_.at(i, l + 1);
    --pooled_transitions_(a, q);
    ++pooled_transitions_(b, q);
  }
}

Label YangState::gibbs_update(int i, int l, double temperature, Rng& rng) {
  const Label a = g_.at(i, l);
  if (k_ == 1) return a;
  full_conditional(i, l, weights_);
  const double top = *std::max_element(weights_.begin(), weights_.end());
  for (auto& v : weights_) v = std::exp((v - top) / temperature);
  const auto b = static_cast<Label>(rng.categorical(weights_));
  if (b != a) apply(i, l, a, b);
  return b;
}

void YangState::check_consistency() const {
  const YangState fresh(*A_, g_);
  if (!(fresh.pooled_m_ == pooled_m_ && fresh.pooled_t_ == pooled_t_ && fresh.pooled_transitions_ == pooled_transitions_))
    throw InvariantViolation("YangState: pooled counts differ from recomputation");
  if (!(fresh.layers_.counts() == layers_.counts()))
    throw InvariantViolation("YangState: layer block counts differ from recomputation");
}

AnnealingResult run_yang_annealing(const TemporalNetwork& A, int communities, const AnnealingSchedule& schedule,
                                   Rng& rng) {
  validate_schedule(schedule);
  YangState state(A, sample_yang(A.nodes(), A.layers(), communities, rng));
  AnnealingResult result;
  for (const auto& stage : schedule)
    for (int sweep = 0; sweep < stage.sweeps; ++sweep) {
      for (int i = 0; i < A.nodes(); ++i)
        for (int l = 0; l < A.layers(); ++l) state.gibbs_update(i, l, stage.temperature, rng);
      result.log_posterior_trace.push_back(state.log_posterior());
    }
  result.estimate = state.assignment();
  return result;
}

} // namespace tempcomm
