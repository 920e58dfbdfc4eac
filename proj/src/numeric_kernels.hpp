#pragma once

// Dense loops of the Monte Carlo transition estimates. Compiled with
// vectorised math; every input must be finite.

#include <span>

namespace tempcomm::kernels {

/// For each draw d: same = a + (1 - a) kappa, move = (1 - a) kappa and their
/// logs. kappa must be positive and a below 1.
void bazzi_factors(std::span<const double> alpha, std::span<const double> kappa, std::span<double> same,
                   std::span<double> move, std::span<double> log_same, std::span<double> log_move);

/// out += c * x
void add_scaled(std::span<double> out, double c, std::span<const double> x);

/// Replaces v by exp(v - max v) and returns max v.
double exponentiate(std::span<double> v);

double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> v);

} // namespace tempcomm::kernels
