#include "mrfem/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mrfem/forms.hpp"

namespace mrfem {

Indicators local_indicators(const SolveResult& result, const SpaceTriple& spaces) {
  const ProductSpace& xhat = spaces.enriched;
  if (result.theta.size() != xhat.ndofs()) throw Error("local_indicators: theta does not match the enriched space");
  const std::vector<double> eta2 = element_x_norms_squared(xhat, result.theta);
  Indicators ind;
  ind.local.resize(eta2.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < eta2.size(); ++t) {
    ind.local[t] = std::sqrt(eta2[t]);
    sum += eta2[t];
  }
  ind.global = std::sqrt(sum);
  return ind;
}

std::vector<int> dorfler_mark(const Indicators& indicators, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw Error("dorfler_mark: theta must lie in (0,1]");
  const auto& eta = indicators.local;
  std::vector<int> order(eta.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eta[a] > eta[b]; });

  // Sum in the same order as the prefix so that theta = 1 selects exactly the nonzero indicators.
  double total = 0.0;
  for (int t : order) total += eta[t] * eta[t];
  std::vector<int> marked;
  if (total <= 0.0) return marked;

  const double target = theta * theta * total;
  double partial = 0.0;
  for (int t : order) {
    if (eta[t] <= 0.0) break;
    marked.push_back(t);
    partial += eta[t] * eta[t];
    if (partial >= target) break;
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

}  // namespace mrfem
