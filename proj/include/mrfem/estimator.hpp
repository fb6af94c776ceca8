#pragma once

#include <span>
#include <vector>

#include "mrfem/saddle.hpp"
#include "mrfem/spaces.hpp"

namespace mrfem {

struct Indicators {
  std::vector<double> local;  // eta_T >= 0
  double global = 0.0;        // sqrt(sum eta_T^2)
};

/// eta_T^2 = ||theta_1||^2_{L2(T)^2} + ||theta_2||^2_{H1(T)} from the enriched block of a solve.
Indicators local_indicators(const SolveResult& result, const SpaceTriple& spaces);

/// Smallest set M with sqrt(sum_{T in M} eta_T^2) >= theta * sqrt(sum_T eta_T^2).
/// Picks largest indicators first, ties by lower id. Returns ascending ids;
/// empty when all indicators vanish.
std::vector<int> dorfler_mark(const Indicators& indicators, double theta);

}  // namespace mrfem
