#pragma once

// JSON and CSV formats. Node ids and labels are 1-based in every file and
// 0-based in memory; the conversion happens only here.

#include "tempcomm/experiments.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace tempcomm::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "tempcomm";
inline constexpr const char* kToolVersion = "1.0.0";

/// Malformed or inconsistent input file.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Rounds to 12 significant digits, the precision of every written number.
double round12(double x);
std::string format_number(double x);

Json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const Json& value);

/// {n, L, layers: [[[i, j], ...], ...]}.
Json network_to_json(const TemporalNetwork& A);
TemporalNetwork network_from_json(const Json& j);

/// {n, L, k, labels: [[g(1,1), ..., g(1,L)], ...]}, one row per node.
Json assignment_to_json(const CommunityAssignment& g);
CommunityAssignment assignment_from_json(const Json& j);

/// {n_max, floor, values}: row k2 holds k1 = 0..k2.
Json jtable_to_json(const JTable& table);
JTable jtable_from_json(const Json& j);
/// Loads a cached table, or builds one for n_max and writes it to path.
JTable load_or_build_jtable(const std::filesystem::path& path, int n_max);

/// {"model": "lecs:0.5", "n": 50, "L": 5, "k": 2}.
Json prior_model_to_json(const PriorModel& model);
PriorModel prior_model_from_json(const Json& j);

/// Missing fields keep their defaults; unknown fields are rejected.
LocalizationPlan localization_plan_from_json(const Json& j);
Json localization_plan_to_json(const LocalizationPlan& plan);
RecoveryPlan recovery_plan_from_json(const Json& j);
Json recovery_plan_to_json(const RecoveryPlan& plan);

/// FNV-1a of the compact serialisation.
std::uint64_t config_hash(const Json& config);

/// {tool, version, command, seed, config_hash, config, outputs}.
Json manifest(const std::string& command, std::uint64_t seed, const Json& config, const Json& outputs);

/// One newline-delimited JSON trace record {sweep, log_posterior, g}.
Json trace_record(int sweep, double log_posterior, const CommunityAssignment& g);

/// Columns: model, n, L, k, draws, seed, scope, layer, size, count, frequency.
void write_histogram_csv(std::ostream& out, const std::vector<LocalizationCellResult>& results);
/// Columns: model, n, L, k, draws, seed, scope, layer, statistic, value.
void write_ipr_csv(std::ostream& out, const std::vector<LocalizationCellResult>& results);
Json localization_results_to_json(const std::vector<LocalizationCellResult>& results);

void write_recovery_records_csv(std::ostream& out, const RecoveryResult& result);
void write_recovery_summary_csv(std::ostream& out, const RecoveryResult& result);
void write_recovery_tests_csv(std::ostream& out, const RecoveryResult& result);
Json recovery_results_to_json(const RecoveryResult& result);

} // namespace tempcomm::io
