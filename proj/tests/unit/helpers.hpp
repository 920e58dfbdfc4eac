#pragma once

#include "tempcomm/core.hpp"
#include "tempcomm/random.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace testing {

/// Empirical frequencies of counts.
inline std::vector<double> normalize(const std::vector<std::uint64_t>& counts) {
  double total = 0.0;
  for (const auto c : counts) total += static_cast<double>(c);
  std::vector<double> f;
  for (const auto c : counts) f.push_back(static_cast<double>(c) / total);
  return f;
}

/// Largest |observed - expected| in units of the binomial standard error.
inline double max_z(const std::vector<std::uint64_t>& counts, const std::vector<double>& expected) {
  double total = 0.0;
  for (const auto c : counts) total += static_cast<double>(c);
  double worst = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double p = expected[i];
    const double sd = std::sqrt(total * p * (1.0 - p));
    const double diff = std::abs(static_cast<double>(counts[i]) - total * p);
    if (sd == 0.0) {
      if (diff > 0.0) return INFINITY;
      continue;
    }
    worst = std::max(worst, diff / sd);
  }
  return worst;
}

inline std::vector<tempcomm::Label> random_labels(int size, int k, tempcomm::Rng& rng) {
  std::vector<tempcomm::Label> v(static_cast<std::size_t>(size));
  for (auto& x : v) x = static_cast<tempcomm::Label>(rng.uniform_int(static_cast<std::uint64_t>(k)));
  return v;
}

} // namespace testing
