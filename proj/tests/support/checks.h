#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mdpboot/measures.h"
#include "mdpboot/simulate.h"

namespace mdpboot::checks {

/// Outcome of one randomized suite.
struct SuiteResult {
  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  bool pass = true;
  std::string detail;
};

std::string describe(const SuiteResult& r);

// ---- independent oracles

/// P(int f d(P*_k - Phat) > theta) by walking all m^k ordered resamples.
double ordered_resample_tail(const std::vector<std::uint64_t>& counts, const std::vector<double>& f,
                             double theta, std::uint64_t k);

/// Minimum of 1/2 sum g_i^2 p_i over densities with sum g_i p_i = 0 and
/// sum f_j,i g_i p_i >= c_j, by nested grid search (final step 1e-3). Any
/// feasible grid point gives an upper bound; +inf if none is found.
/// Supports of size 2 to 4 only.
double grid_search_rate(const std::vector<double>& p, const std::vector<std::vector<double>>& fs,
                        const std::vector<double>& cs);

/// Maximum of the Lagrange dual sum l_j c_j - 1/2 Var(sum l_j f_j) over
/// l >= 0 by adaptive grid search: a lower bound that is tight for convex
/// problems. +inf when the dual is unbounded. One or two constraints.
double dual_grid_rate(const std::vector<double>& p, const std::vector<std::vector<double>>& fs,
                      const std::vector<double>& cs);

/// Sup of |F - G| over the union of atoms, computed directly from step tables.
double classic_ks(const std::vector<double>& xa, const std::vector<double>& fa, const std::vector<double>& xb,
                  const std::vector<double>& fb);

// ---- random instance helpers

std::vector<double> random_probs(std::mt19937_64& gen, std::size_t m, double floor = 0.0);
std::vector<double> random_values(std::mt19937_64& gen, std::size_t m, double lo, double hi);

// ---- acceptance-scale suites

/// Monte Carlo against exact enumeration: random (support <= 3, n <= 6, k <= 6)
/// cases with f and theta drawn at random, each checked over `seeds` seeds.
SuiteResult oracle_equivalence(std::size_t cases, std::size_t seeds, std::uint64_t trials, std::uint64_t seed);

/// min_rate_linear with one equality constraint against the closed form.
SuiteResult rate_closed_form(std::size_t instances, std::uint64_t seed);

/// min_rate_linear on supports of size <= 4, bracketed between dual_grid_rate
/// and grid_search_rate.
SuiteResult rate_brute_force(std::size_t instances, std::uint64_t seed);

// ---- invariant suites

std::vector<SuiteResult> measures_properties(std::size_t instances, std::uint64_t seed);
std::vector<SuiteResult> rate_properties(std::size_t instances, std::uint64_t seed);
std::vector<SuiteResult> zones_properties(std::size_t instances, std::uint64_t seed);
std::vector<SuiteResult> simulate_properties(std::size_t instances, std::uint64_t seed);
std::vector<SuiteResult> functionals_properties(std::size_t instances, std::uint64_t seed);
std::vector<SuiteResult> experiments_properties(std::size_t instances, std::uint64_t seed);

}  // namespace mdpboot::checks
