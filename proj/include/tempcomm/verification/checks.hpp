#pragma once

// Acceptance checks, one per criterion. Each returns pass/fail, a short
// human-readable detail and the statistics it computed, so a rerun can be
// compared bitwise.

#include "tempcomm/experiments.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tempcomm::checks {

struct CheckOptions {
  std::uint64_t seed = 20240601;
  int workers = 1;
  /// Table to validate in the special-function check; built fresh when null.
  const JTable* table = nullptr;
};

struct CheckResult {
  int criterion = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  std::vector<double> statistics;
};

/// J by digamma, partial fractions and quadrature; column sums.
CheckResult special_functions(const CheckOptions& options);
/// Brute-force sums of the prior over all assignments.
CheckResult prior_normalization(const CheckOptions& options);
/// Forward LECS draws against the density, n = L = k = 2.
CheckResult forward_density(const CheckOptions& options);
/// Monolayer IPR reference values and the asymptotic plug-ins.
CheckResult monolayer_ipr(const CheckOptions& options);
/// Per-layer and overall IPR of the temporal models.
CheckResult temporal_ipr(const CheckOptions& options, std::vector<LocalizationCellResult>* results = nullptr);
/// Layer-200 size law of LECS with fixed retention; interior flatness.
CheckResult lecs_stationary(const CheckOptions& options);
/// Chain frequencies against the enumerated posterior, n = 4, L = 2, k = 2.
CheckResult posterior_tiny(const CheckOptions& options);
/// Recovery benchmark orderings.
CheckResult recovery(const CheckOptions& options, RecoveryResult* result = nullptr);
/// NMI examples and Mann-Whitney exact vs normal agreement.
CheckResult statistical_utilities(const CheckOptions& options);

struct DeterminismInputs {
  std::vector<CheckResult> results;
  const std::vector<LocalizationCellResult>* localization = nullptr;
  const RecoveryResult* recovery = nullptr;
};

/// Reruns the cheap checks in full, one localization cell (with a different
/// worker count) and a sample of recovery records from their recorded
/// seeds, and compares every statistic bitwise.
CheckResult determinism(const CheckOptions& options, const DeterminismInputs& inputs);

/// Plan used by the temporal IPR check.
LocalizationPlan temporal_ipr_plan(const CheckOptions& options);
/// Plan used by the recovery check.
RecoveryPlan recovery_plan(const CheckOptions& options);

} // namespace tempcomm::checks
