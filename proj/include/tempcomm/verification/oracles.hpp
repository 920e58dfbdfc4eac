#pragma once

// Reference computations that share no code path with the library routines
// they check: quadrature, closed sums, brute-force enumeration and a direct
// pair-count likelihood.

#include "tempcomm/core.hpp"
#include "tempcomm/priors.hpp"

#include <functional>
#include <span>
#include <vector>

namespace tempcomm::oracle {

/// J(k1, k2) by adaptive Gauss-Kronrod quadrature of x^k1 / (1 + x + ... + x^k2).
double j_quadrature(int k1, int k2);

/// J(k1, k2) from the Boost digamma.
double j_boost_digamma(int k1, int k2);

/// log P(cur | prev) under LECS with random retention, built from the
/// generative steps: quadrature for the retention law, a uniform weak
/// composition of the movers and a uniform labelling given the counts.
double lecs_transition_log(std::span<const Label> prev, std::span<const Label> cur, int k);

/// Exact log of the Bazzi transition integral by expanding each
/// (alpha + (1 - alpha) kappa_s)^same_s and integrating term by term.
double bazzi_transition_log(std::span<const Label> prev, std::span<const Label> cur, int k);

/// Nodewise first-layer law from the Dirichlet-multinomial with unit
/// parameters, written as a Gamma-function ratio.
double first_layer_log(std::span<const Label> g1, int k);

/// Exact log prior for uniform, nodewise, Bazzi and LECS (random retention).
double log_prior(const CommunityAssignment& g, const PriorModel& model);

/// log P(A | g) by counting node pairs directly, one Beta(1,1) parameter
/// per layer and block pair.
double log_likelihood(const TemporalNetwork& A, const CommunityAssignment& g);

/// Calls fn for each of the k^(nL) assignments, in lexicographic order of
/// the layer-major label vector.
void for_each_assignment(int nodes, int layers, int communities, const std::function<void(const CommunityAssignment&)>& fn);

/// Index of g in the enumeration order of for_each_assignment.
std::size_t assignment_index(const CommunityAssignment& g);

/// Normalised posterior over every assignment, indexed as above.
std::vector<double> enumerate_posterior(const TemporalNetwork& A, const PriorModel& model);

/// Monolayer nodewise draw in two stages: community sizes uniform over weak
/// compositions, then a uniformly random labelling with those sizes.
CommunityAssignment nodewise_two_stage(int nodes, int communities, Rng& rng);

/// Stationary law of a row-stochastic matrix by power iteration.
std::vector<double> power_iteration(const std::vector<std::vector<double>>& kernel, int iterations = 100000,
                                    double tolerance = 1e-15);

/// One-sided Mann-Whitney p-value by listing every split of the pooled
/// ranks. Needs |x| + |y| <= 24.
double mann_whitney_enumerated(std::span<const double> x, std::span<const double> y);

/// NMI from the contingency table in base-2 logarithms.
double nmi_base2(std::span<const Label> a, std::span<const Label> b);

} // namespace tempcomm::oracle
