#include "tempcomm/priors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tempcomm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(int nodes, int layers, int communities) {
  if (nodes < 1 || layers < 1 || communities < 1)
    throw std::invalid_argument("prior sampler: n, L and k must be positive");
}

Label draw_from(std::span<const double> probabilities, Rng& rng) {
  return static_cast<Label>(rng.categorical(probabilities));
}

// Nodewise first layer: pi ~ Dir(1), labels iid from pi.
void fill_nodewise_layer(std::span<Label> out, int communities, Rng& rng) {
  const auto pi = sample_flat_dirichlet(communities, rng);
  for (auto& label : out) label = draw_from(pi, rng);
}

} // namespace

RetentionMode RetentionMode::fixed(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("RetentionMode::fixed: p must lie in [0, 1]");
  RetentionMode mode;
  mode.random_ = false;
  mode.p_ = p;
  return mode;
}

void PriorModel::validate() const {
  require_positive(nodes, layers, communities);
  if (std::holds_alternative<NodewiseMonolayer>(kind) && layers != 1)
    throw std::invalid_argument("PriorModel: the nodewise monolayer prior requires L = 1");
}

std::string prior_kind_name(const PriorKind& kind) {
  return std::visit(overloaded{
                        [](const UniformAssignments&) -> std::string { return "uniform"; },
                        [](const NodewiseMonolayer&) -> std::string { return "nodewise"; },
                        [](const YangMarkov&) -> std::string { return "yang"; },
                        [](const BazziMarkov&) -> std::string { return "bazzi"; },
                        [](const Lecs& lecs) -> std::string {
                          if (lecs.retention.is_random()) return "lecs";
                          std::ostringstream os;
                          os.precision(12);
                          os << "lecs:" << lecs.retention.fixed_probability();
                          return os.str();
                        },
                    },
                    kind);
}

std::string PriorModel::name() const { return prior_kind_name(kind); }

PriorKind parse_prior_kind(const std::string& text) {
  if (text == "uniform") return UniformAssignments{};
  if (text == "nodewise") return NodewiseMonolayer{};
  if (text == "yang") return YangMarkov{};
  if (text == "bazzi") return BazziMarkov{};
  if (text == "lecs") return Lecs{};
  if (text.rfind("lecs:", 0) == 0) {
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(text.substr(5), &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("unknown prior model '" + text + "'");
    }
    if (used != text.size() - 5) throw std::invalid_argument("unknown prior model '" + text + "'");
    return Lecs{RetentionMode::fixed(p)};
  }
  throw std::invalid_argument("unknown prior model '" + text + "'");
}

std::vector<double> sample_flat_dirichlet(int dimension, Rng& rng) {
  if (dimension < 1) throw std::invalid_argument("sample_flat_dirichlet: dimension must be positive");
  std::vector<double> x(static_cast<std::size_t>(dimension));
  double total = 0.0;
  for (auto& v : x) {
    v = rng.exponential();
    total += v;
  }
  for (auto& v : x) v /= total;
  return x;
}

CommunityAssignment sample_uniform_assignment(int nodes, int layers, int communities, Rng& rng) {
  require_positive(nodes, layers, communities);
  std::vector<Label> labels(static_cast<std::size_t>(nodes) * static_cast<std::size_t>(layers));
  for (auto& r : labels) r = static_cast<Label>(rng.uniform_int(static_cast<std::uint64_t>(communities)));
  return CommunityAssignment(nodes, layers, communities, std::move(labels));
}

WeakComposition sample_uniform_composition(std::int64_t total, int parts, Rng& rng) {
  if (parts < 1) throw std::invalid_argument("sample_uniform_composition: parts must be positive");
  if (total < 0) throw std::invalid_argument("sample_uniform_composition: total must be non-negative");
  const std::int64_t slots = total + parts - 1;
  const std::int64_t bars = parts - 1;
  // Floyd's algorithm for a uniform (bars)-subset of {0, ..., slots-1}.
  std::vector<std::int64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(bars));
  for (std::int64_t j = slots - bars; j < slots; ++j) {
    const auto t = static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(j + 1)));
    if (std::find(chosen.begin(), chosen.end(), t) == chosen.end())
      chosen.push_back(t);
    else
      chosen.push_back(j);
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<std::int64_t> result(static_cast<std::size_t>(parts));
  std::int64_t previous = -1;
  for (std::size_t b = 0; b < chosen.size(); ++b) {
    result[b] = chosen[b] - previous - 1;
    previous = chosen[b];
  }
  result.back() = slots - 1 - previous;
  return WeakComposition(std::move(result));
}

CommunityAssignment sample_nodewise_monolayer(int nodes, int communities, Rng& rng) {
  require_positive(nodes, 1, communities);
  std::vector<Label> labels(static_cast<std::size_t>(nodes));
  fill_nodewise_layer(labels, communities, rng);
  return CommunityAssignment(nodes, 1, communities, std::move(labels));
}

std::int64_t sample_truncated_geometric(std::int64_t n, double p, Rng& rng) {
  if (n < 0) throw std::invalid_argument("sample_truncated_geometric: n must be non-negative");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_truncated_geometric: p must lie in [0, 1]");
  if (n == 0 || p == 0.0) return n;
  if (p == 1.0) return static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(n + 1)));
  // The shortfall v = n - m has P(v) proportional to p^v on {0, ..., n};
  // invert its CDF (1 - p^(v+1)) / (1 - p^(n+1)).
  const double log_p = std::log(p);
  const double mass = -std::expm1(static_cast<double>(n + 1) * log_p);
  const double u = rng.uniform();
  const double v = std::floor(std::log1p(-u * mass) / log_p);
  const auto shortfall = std::clamp(static_cast<std::int64_t>(v), std::int64_t{0}, n);
  return n - shortfall;
}

CommunityAssignment sample_yang(int nodes, int layers, int communities, Rng& rng) {
  require_positive(nodes, layers, communities);
  const auto n = static_cast<std::size_t>(nodes);
  std::vector<Label> labels(n * static_cast<std::size_t>(layers));
  fill_nodewise_layer(std::span(labels).first(n), communities, rng);
  std::vector<std::vector<double>> kernel;
  kernel.reserve(static_cast<std::size_t>(communities));
  for (int s = 0; s < communities; ++s) kernel.push_back(sample_flat_dirichlet(communities, rng));
  for (std::size_t l = 1; l < static_cast<std::size_t>(layers); ++l)
    for (std::size_t i = 0; i < n; ++i)
      labels[l * n + i] = draw_from(kernel[static_cast<std::size_t>(labels[(l - 1) * n + i])], rng);
  return CommunityAssignment(nodes, layers, communities, std::move(labels));
}

CommunityAssignment sample_bazzi(int nodes, int layers, int communities, Rng& rng) {
  require_positive(nodes, layers, communities);
  const auto n = static_cast<std::size_t>(nodes);
  std::vector<Label> labels(n * static_cast<std::size_t>(layers));
  fill_nodewise_layer(std::span(labels).first(n), communities, rng);
  for (std::size_t l = 1; l < static_cast<std::size_t>(layers); ++l) {
    const double laziness = rng.uniform();
    const auto kappa = sample_flat_dirichlet(communities, rng);
    for (std::size_t i = 0; i < n; ++i)
      labels[l * n + i] = rng.uniform() < laziness ? labels[(l - 1) * n + i] : draw_from(kappa, rng);
  }
  return CommunityAssignment(nodes, layers, communities, std::move(labels));
}

CommunityAssignment sample_lecs(int nodes, int layers, int communities, const RetentionMode& retention, Rng& rng) {
  require_positive(nodes, layers, communities);
  const auto n = static_cast<std::size_t>(nodes);
  const auto k = static_cast<std::size_t>(communities);
  std::vector<Label> labels(n * static_cast<std::size_t>(layers));
  if (communities == 1) return CommunityAssignment(nodes, layers, communities, std::move(labels));

  fill_nodewise_layer(std::span(labels).first(n), communities, rng);
  std::vector<std::vector<std::size_t>> blocks(k);
  std::vector<Label> multiset;
  for (std::size_t l = 1; l < static_cast<std::size_t>(layers); ++l) {
    for (auto& block : blocks) block.clear();
    for (std::size_t i = 0; i < n; ++i) blocks[static_cast<std::size_t>(labels[(l - 1) * n + i])].push_back(i);

    for (std::size_t r = 0; r < k; ++r) {
      const auto& block = blocks[r];
      if (block.empty()) continue;
      const auto size = static_cast<std::int64_t>(block.size());
      // Geometric retention, then a uniform split of the movers over the
      // other k - 1 communities.
      const std::int64_t remainers = sample_truncated_geometric(size, retention.draw(rng), rng);
      const WeakComposition movers = sample_uniform_composition(size - remainers, communities - 1, rng);

      multiset.assign(static_cast<std::size_t>(remainers), static_cast<Label>(r));
      std::size_t part = 0;
      for (std::size_t s = 0; s < k; ++s) {
        if (s == r) continue;
        multiset.insert(multiset.end(), static_cast<std::size_t>(movers[part++]), static_cast<Label>(s));
      }
      // Microcanonical labelling: uniform over assignments with these counts.
      rng.shuffle(std::span<Label>(multiset));
      for (std::size_t j = 0; j < block.size(); ++j) labels[l * n + block[j]] = multiset[j];
    }
  }
  return CommunityAssignment(nodes, layers, communities, std::move(labels));
}

CommunityAssignment sample_prior(const PriorModel& model, Rng& rng) {
  model.validate();
  const int n = model.nodes;
  const int L = model.layers;
  const int k = model.communities;
  return std::visit(overloaded{
                        [&](const UniformAssignments&) { return sample_uniform_assignment(n, L, k, rng); },
                        [&](const NodewiseMonolayer&) { return sample_nodewise_monolayer(n, k, rng); },
                        [&](const YangMarkov&) { return sample_yang(n, L, k, rng); },
                        [&](const BazziMarkov&) { return sample_bazzi(n, L, k, rng); },
                        [&](const Lecs& lecs) { return sample_lecs(n, L, k, lecs.retention, rng); },
                    },
                    model.kind);
}

} // namespace tempcomm
