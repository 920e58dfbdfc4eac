#include "tempcomm/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace tempcomm::io {

namespace {

// Reads named fields of a JSON object and rejects any it was not asked for.
class Fields {
public:
  Fields(const Json& j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j_.is_object()) throw FormatError(what_ + ": expected a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& required(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw FormatError(what_ + ": missing field '" + key + "'");
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    const Json& v = required(key);
    try {
      return v.get<T>();
    } catch (const nlohmann::json::exception&) {
      throw FormatError(what_ + ": field '" + key + "' has the wrong type");
    }
  }

  template <class T>
  void read(const std::string& key, T& into) {
    if (has(key)) into = get<T>(key);
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.contains(item.key())) throw FormatError(what_ + ": unknown field '" + item.key() + "'");
  }

private:
  const Json& j_;
  std::string what_;
  std::set<std::string> seen_;
};

Json prior_cell_columns(const LocalizationCellResult& r) {
  return Json{{"model", r.cell.model.name()},
              {"n", r.cell.model.nodes},
              {"L", r.cell.model.layers},
              {"k", r.cell.model.communities},
              {"draws", r.cell.draws},
              {"seed", r.seed}};
}

std::string cell_prefix(const LocalizationCellResult& r, const HistogramSummary& h) {
  std::ostringstream s;
  s << r.cell.model.name() << ',' << r.cell.model.nodes << ',' << r.cell.model.layers << ','
    << r.cell.model.communities << ',' << r.cell.draws << ',' << r.seed << ',' << h.scope << ','
    << (h.layer < 0 ? std::string() : std::to_string(h.layer + 1));
  return s.str();
}

template <class F>
auto wrap(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const FormatError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw FormatError(what + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(what + ": " + e.what());
  }
}

} // namespace

double round12(double x) {
  if (!std::isfinite(x)) return x;
  return std::stod(format_number(x));
}

std::string format_number(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.12g", x);
  return buffer;
}

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void save_json(const std::filesystem::path& path, const Json& value) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << value.dump(2) << '\n';
}

Json network_to_json(const TemporalNetwork& A) {
  Json layers = Json::array();
  for (int l = 0; l < A.layers(); ++l) {
    Json edges = Json::array();
    for (const auto& [i, j] : A.edges(l)) edges.push_back({i + 1, j + 1});
    layers.push_back(std::move(edges));
  }
  return Json{{"n", A.nodes()}, {"L", A.layers()}, {"layers", std::move(layers)}};
}

TemporalNetwork network_from_json(const Json& j) {
  return wrap("network", [&] {
    Fields f(j, "network");
    const int n = f.get<int>("n");
    const int L = f.get<int>("L");
    const Json& layers = f.required("layers");
    f.finish();
    if (n < 1 || L < 1) throw FormatError("network: n and L must be positive");
    if (!layers.is_array() || static_cast<int>(layers.size()) != L)
      throw FormatError("network: expected " + std::to_string(L) + " edge lists");
    std::vector<std::vector<Edge>> edges(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l)
      for (const auto& e : layers[static_cast<std::size_t>(l)]) {
        if (!e.is_array() || e.size() != 2) throw FormatError("network: an edge must be a pair of node ids");
        const int a = e[0].get<int>();
        const int b = e[1].get<int>();
        if (a < 1 || a > n || b < 1 || b > n) throw FormatError("network: node id outside 1..n");
        edges[static_cast<std::size_t>(l)].emplace_back(a - 1, b - 1);
      }
    return TemporalNetwork(n, std::move(edges));
  });
}

Json assignment_to_json(const CommunityAssignment& g) {
  Json rows = Json::array();
  for (int i = 0; i < g.nodes(); ++i) {
    Json row = Json::array();
    for (int l = 0; l < g.layers(); ++l) row.push_back(g.at(i, l) + 1);
    rows.push_back(std::move(row));
  }
  return Json{{"n", g.nodes()}, {"L", g.layers()}, {"k", g.communities()}, {"labels", std::move(rows)}};
}

CommunityAssignment assignment_from_json(const Json& j) {
  return wrap("assignment", [&] {
    Fields f(j, "assignment");
    const int n = f.get<int>("n");
    const int L = f.get<int>("L");
    const int k = f.get<int>("k");
    const Json& rows = f.required("labels");
    f.finish();
    if (n < 1 || L < 1 || k < 1) throw FormatError("assignment: n, L and k must be positive");
    if (!rows.is_array() || static_cast<int>(rows.size()) != n) throw FormatError("assignment: expected n label rows");
    std::vector<Label> labels(static_cast<std::size_t>(n) * static_cast<std::size_t>(L));
    for (int i = 0; i < n; ++i) {
      const Json& row = rows[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<int>(row.size()) != L) throw FormatError("assignment: expected L labels per row");
      for (int l = 0; l < L; ++l) {
        const int label = row[static_cast<std::size_t>(l)].get<int>();
        if (label < 1 || label > k) throw FormatError("assignment: label outside 1..k");
        labels[static_cast<std::size_t>(l) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] =
            static_cast<Label>(label - 1);
      }
    }
    return CommunityAssignment(n, L, k, std::move(labels));
  });
}

Json jtable_to_json(const JTable& table) {
  // Full precision: the cache must reproduce the table exactly.
  return Json{{"n_max", table.n_max()}, {"floor", table.floor()}, {"values", table.values()}};
}

JTable jtable_from_json(const Json& j) {
  return wrap("J table", [&] {
    Fields f(j, "J table");
    const int n_max = f.get<int>("n_max");
    const double floor = f.get<double>("floor");
    auto values = f.get<std::vector<double>>("values");
    f.finish();
    return JTable::from_values(n_max, floor, std::move(values));
  });
}

JTable load_or_build_jtable(const std::filesystem::path& path, int n_max) {
  if (std::filesystem::exists(path)) {
    JTable table = jtable_from_json(load_json(path));
    if (table.n_max() < n_max)
      throw FormatError("J table cache '" + path.string() + "' covers n <= " + std::to_string(table.n_max()));
    return table;
  }
  JTable table(n_max);
  save_json(path, jtable_to_json(table));
  return table;
}

Json prior_model_to_json(const PriorModel& model) {
  return Json{{"model", prior_kind_name(model.kind)},
              {"n", model.nodes},
              {"L", model.layers},
              {"k", model.communities}};
}

PriorModel prior_model_from_json(const Json& j) {
  return wrap("model", [&] {
    Fields f(j, "model");
    PriorModel m;
    m.kind = parse_prior_kind(f.get<std::string>("model"));
    m.nodes = f.get<int>("n");
    m.layers = f.get<int>("L");
    m.communities = f.get<int>("k");
    f.finish();
    m.validate();
    return m;
  });
}

LocalizationPlan localization_plan_from_json(const Json& j) {
  return wrap("localization plan", [&] {
    Fields f(j, "localization plan");
    if (f.has("study") && f.get<std::string>("study") != "localization")
      throw FormatError("localization plan: study must be 'localization'");
    LocalizationPlan plan;
    f.read("seed", plan.seed);
    f.read("workers", plan.workers);
    f.read("bootstrap", plan.bootstrap);
    f.read("chunk", plan.chunk);
    if (f.has("community")) plan.community = static_cast<Label>(f.get<int>("community") - 1);
    const Json& cells = f.required("cells");
    f.finish();
    if (!cells.is_array() || cells.empty()) throw FormatError("localization plan: 'cells' must be a non-empty array");
    for (const auto& c : cells) {
      Fields cf(c, "localization cell");
      LocalizationCell cell;
      cell.model.kind = parse_prior_kind(cf.get<std::string>("model"));
      cell.model.nodes = cf.get<int>("n");
      cell.model.layers = cf.get<int>("L");
      cell.model.communities = cf.get<int>("k");
      cf.read("draws", cell.draws);
      if (cf.has("seed")) cell.seed = cf.get<std::uint64_t>("seed");
      cf.finish();
      cell.model.validate();
      if (cell.draws < 1) throw FormatError("localization cell: draws must be positive");
      plan.cells.push_back(std::move(cell));
    }
    if (plan.community < 0) throw FormatError("localization plan: community is 1-based");
    return plan;
  });
}

Json localization_plan_to_json(const LocalizationPlan& plan) {
  Json cells = Json::array();
  for (const auto& c : plan.cells) {
    Json cell = prior_model_to_json(c.model);
    cell["draws"] = c.draws;
    if (c.seed) cell["seed"] = *c.seed;
    cells.push_back(std::move(cell));
  }
  return Json{{"study", "localization"}, {"seed", plan.seed},           {"workers", plan.workers},
              {"bootstrap", plan.bootstrap}, {"chunk", plan.chunk},     {"community", plan.community + 1},
              {"cells", std::move(cells)}};
}

RecoveryPlan recovery_plan_from_json(const Json& j) {
  return wrap("recovery plan", [&] {
    Fields f(j, "recovery plan");
    if (f.has("study") && f.get<std::string>("study") != "recovery")
      throw FormatError("recovery plan: study must be 'recovery'");
    RecoveryPlan plan = RecoveryPlan::defaults();
    f.read("n", plan.nodes);
    f.read("offsets", plan.offsets);
    f.read("q", plan.q_values);
    f.read("omega_diagonal", plan.omega_diagonals);
    f.read("omega_off_diagonal", plan.omega_off_diagonal);
    f.read("instances", plan.instances);
    f.read("sweeps", plan.sweeps);
    f.read("burn_in", plan.burn_in);
    f.read("thinning", plan.thinning);
    f.read("swap_probability", plan.swap_probability);
    f.read("mc_draws", plan.mc_budget.draws);
    f.read("seed", plan.seed);
    f.read("workers", plan.workers);
    if (f.has("methods")) {
      plan.methods.clear();
      for (const auto& name : f.get<std::vector<std::string>>("methods"))
        plan.methods.push_back(parse_recovery_method(name));
      // Default comparisons only survive when both sides are still present.
      std::erase_if(plan.comparisons, [&](const RecoveryComparison& c) {
        auto missing = [&](const std::string& n) {
          return std::none_of(plan.methods.begin(), plan.methods.end(),
                              [&](const RecoveryMethod& m) { return m.name == n; });
        };
        return missing(c.better) || missing(c.worse);
      });
    }
    if (f.has("comparisons")) {
      plan.comparisons.clear();
      for (const auto& pair : f.get<std::vector<std::vector<std::string>>>("comparisons")) {
        if (pair.size() != 2) throw FormatError("recovery plan: a comparison is a [better, worse] pair");
        plan.comparisons.push_back({pair[0], pair[1]});
      }
    }
    if (f.has("schedule")) {
      plan.schedule.clear();
      for (const auto& stage : f.get<std::vector<std::pair<double, int>>>("schedule"))
        plan.schedule.push_back({stage.first, stage.second});
    }
    f.finish();
    plan.validate();
    if (plan.sweeps < 1 || plan.thinning < 1) throw FormatError("recovery plan: sweeps and thinning must be positive");
    if (!(plan.swap_probability >= 0.0 && plan.swap_probability <= 1.0))
      throw FormatError("recovery plan: swap_probability outside [0, 1]");
    return plan;
  });
}

Json recovery_plan_to_json(const RecoveryPlan& plan) {
  Json methods = Json::array();
  for (const auto& m : plan.methods) methods.push_back(m.name);
  Json comparisons = Json::array();
  for (const auto& c : plan.comparisons) comparisons.push_back({c.better, c.worse});
  Json schedule = Json::array();
  for (const auto& s : plan.schedule) schedule.push_back({s.temperature, s.sweeps});
  return Json{{"study", "recovery"},
              {"n", plan.nodes},
              {"offsets", plan.offsets},
              {"q", plan.q_values},
              {"omega_diagonal", plan.omega_diagonals},
              {"omega_off_diagonal", plan.omega_off_diagonal},
              {"instances", plan.instances},
              {"methods", std::move(methods)},
              {"comparisons", std::move(comparisons)},
              {"sweeps", plan.sweeps},
              {"burn_in", plan.burn_in},
              {"thinning", plan.thinning},
              {"swap_probability", plan.swap_probability},
              {"mc_draws", plan.mc_budget.draws},
              {"schedule", std::move(schedule)},
              {"seed", plan.seed},
              {"workers", plan.workers}};
}

std::uint64_t config_hash(const Json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Json manifest(const std::string& command, std::uint64_t seed, const Json& config, const Json& outputs) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(config)));
  return Json{{"tool", kToolName}, {"version", kToolVersion}, {"command", command},  {"seed", seed},
              {"config_hash", hash}, {"config", config},      {"outputs", outputs}};
}

Json trace_record(int sweep, double log_posterior, const CommunityAssignment& g) {
  return Json{{"sweep", sweep}, {"log_posterior", round12(log_posterior)}, {"g", assignment_to_json(g)["labels"]}};
}

void write_histogram_csv(std::ostream& out, const std::vector<LocalizationCellResult>& results) {
  out << "model,n,L,k,draws,seed,scope,layer,size,count,frequency\n";
  for (const auto& r : results)
    for (const auto& h : r.histograms) {
      const std::string prefix = cell_prefix(r, h);
      for (std::int64_t s = 0; s <= h.histogram.max_size(); ++s)
        out << prefix << ',' << s << ',' << h.histogram.counts()[static_cast<std::size_t>(s)] << ','
            << format_number(h.histogram.frequency(s)) << '\n';
    }
}

void write_ipr_csv(std::ostream& out, const std::vector<LocalizationCellResult>& results) {
  out << "model,n,L,k,draws,seed,scope,layer,statistic,value\n";
  for (const auto& r : results)
    for (const auto& h : r.histograms) {
      const std::string prefix = cell_prefix(r, h);
      out << prefix << ",ipr," << format_number(h.ipr) << '\n';
      out << prefix << ",ipr_standard_error," << format_number(h.ipr_standard_error) << '\n';
    }
}

Json localization_results_to_json(const std::vector<LocalizationCellResult>& results) {
  Json cells = Json::array();
  for (const auto& r : results) {
    Json cell = prior_cell_columns(r);
    Json histograms = Json::array();
    for (const auto& h : r.histograms) {
      Json entry{{"scope", h.scope}};
      if (h.layer >= 0) entry["layer"] = h.layer + 1;
      entry["ipr"] = round12(h.ipr);
      entry["ipr_standard_error"] = round12(h.ipr_standard_error);
      entry["counts"] = h.histogram.counts();
      histograms.push_back(std::move(entry));
    }
    cell["histograms"] = std::move(histograms);
    cells.push_back(std::move(cell));
  }
  return cells;
}

void write_recovery_records_csv(std::ostream& out, const RecoveryResult& result) {
  out << "q,omega_diagonal,instance,method,network_seed,chain_seed,nmi,correct_fraction,samples,swap_acceptance\n";
  for (const auto& r : result.records)
    out << r.q << ',' << format_number(r.omega_diagonal) << ',' << r.instance + 1 << ',' << r.method << ','
        << r.network_seed << ',' << r.chain_seed << ',' << format_number(r.nmi) << ','
        << format_number(r.correct_fraction) << ',' << r.samples << ',' << format_number(r.swap_acceptance) << '\n';
}

void write_recovery_summary_csv(std::ostream& out, const RecoveryResult& result) {
  out << "q,omega_diagonal,method,instances,mean_nmi,sd_nmi\n";
  for (const auto& s : result.summaries)
    out << s.q << ',' << format_number(s.omega_diagonal) << ',' << s.method << ',' << s.instances << ','
        << format_number(s.mean_nmi) << ',' << format_number(s.sd_nmi) << '\n';
}

void write_recovery_tests_csv(std::ostream& out, const RecoveryResult& result) {
  out << "q,omega_diagonal,better,worse,mean_better,mean_worse,p_value\n";
  for (const auto& t : result.tests)
    out << t.q << ',' << format_number(t.omega_diagonal) << ',' << t.better << ',' << t.worse << ','
        << format_number(t.mean_better) << ',' << format_number(t.mean_worse) << ',' << format_number(t.p_value)
        << '\n';
}

Json recovery_results_to_json(const RecoveryResult& result) {
  Json summaries = Json::array();
  for (const auto& s : result.summaries)
    summaries.push_back({{"q", s.q},
                         {"omega_diagonal", round12(s.omega_diagonal)},
                         {"method", s.method},
                         {"instances", s.instances},
                         {"mean_nmi", round12(s.mean_nmi)},
                         {"sd_nmi", round12(s.sd_nmi)}});
  Json tests = Json::array();
  for (const auto& t : result.tests)
    tests.push_back({{"q", t.q},
                     {"omega_diagonal", round12(t.omega_diagonal)},
                     {"better", t.better},
                     {"worse", t.worse},
                     {"mean_better", round12(t.mean_better)},
                     {"mean_worse", round12(t.mean_worse)},
                     {"p_value", round12(t.p_value)}});
  return Json{{"summaries", std::move(summaries)}, {"tests", std::move(tests)}};
}

} // namespace tempcomm::io
