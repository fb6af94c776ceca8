#include "mrfem/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "mrfem/mesh.hpp"

namespace mrfem {

namespace {

// Legendre P_n and its derivative at x in [-1,1].
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

QuadRule gauss_legendre(int npoints) {
  if (npoints < 1) throw Error("gauss_legendre: need at least one point");
  QuadRule rule;
  rule.degree = 2 * npoints - 1;
  rule.points.resize(npoints);
  rule.weights.resize(npoints);
  for (int i = 0; i < npoints; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (npoints + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(npoints, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [p, dp] = legendre(npoints, x);
    (void)p;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1,1] -> [0,1], ascending order.
    rule.points[npoints - 1 - i] = {0.5 * (x + 1.0), 0.0, 0.0};
    rule.weights[npoints - 1 - i] = 0.5 * w;
  }
  return rule;
}

QuadRule segment_rule(int degree) {
  if (degree < 0) throw Error("segment_rule: negative degree");
  QuadRule rule = gauss_legendre(degree / 2 + 1);
  rule.degree = degree;
  return rule;
}

QuadRule triangle_rule(int degree) {
  if (degree < 0) throw Error("triangle_rule: negative degree");
  static std::mutex mutex;
  static std::map<int, QuadRule> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(degree); it != cache.end()) return it->second;
  }

  // x = s, y = t (1 - s) with Jacobian (1 - s): the s-integrand has degree + 1.
  const QuadRule gs = gauss_legendre((degree + 1) / 2 + 1);
  const QuadRule gt = gauss_legendre(degree / 2 + 1);
  QuadRule rule;
  rule.degree = degree;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const double s = gs.points[i][0];
    for (std::size_t j = 0; j < gt.size(); ++j) {
      const double t = gt.points[j][0];
      const double x = s;
      const double y = t * (1.0 - s);
      rule.points.push_back({1.0 - x - y, x, y});
      rule.weights.push_back(gs.weights[i] * gt.weights[j] * (1.0 - s));
    }
  }

  std::lock_guard lock(mutex);
  cache.emplace(degree, rule);
  return rule;
}

QuadRule graded_triangle_rule(int degree, int singular_vertex, int levels, double ratio) {
  if (levels < 1) throw Error("graded_triangle_rule: levels must be >= 1");
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error("graded_triangle_rule: ratio must lie in (0,1)");
  if (singular_vertex < 0 || singular_vertex > 2) throw Error("graded_triangle_rule: bad vertex index");

  using Bary = std::array<double, 3>;
  const QuadRule base = triangle_rule(degree);
  const int s = singular_vertex;
  const int a = (s + 1) % 3;
  const int b = (s + 2) % 3;

  // Point on segment from the singular vertex toward vertex k at scale r.
  auto toward = [&](int k, double r) {
    Bary p{0.0, 0.0, 0.0};
    p[s] = 1.0 - r;
    p[k] = r;
    return p;
  };
  // Reference (x,y) = (lambda1, lambda2); area ratio of a barycentric cell.
  auto cell_area = [](const Bary& c0, const Bary& c1, const Bary& c2) {
    return std::abs((c1[1] - c0[1]) * (c2[2] - c0[2]) - (c2[1] - c0[1]) * (c1[2] - c0[2]));
  };

  QuadRule rule;
  rule.degree = degree;
  auto add_cell = [&](const Bary& c0, const Bary& c1, const Bary& c2) {
    const double scale = cell_area(c0, c1, c2);  // relative to the reference area 1/2
    for (std::size_t q = 0; q < base.size(); ++q) {
      const auto& l = base.points[q];
      Bary p{};
      for (int k = 0; k < 3; ++k) p[k] = l[0] * c0[k] + l[1] * c1[k] + l[2] * c2[k];
      rule.points.push_back(p);
      rule.weights.push_back(base.weights[q] * scale);
    }
  };

  double outer = 1.0;
  for (int level = 0; level < levels; ++level) {
    const double inner = outer * ratio;
    const Bary a0 = toward(a, outer), b0 = toward(b, outer);
    const Bary a1 = toward(a, inner), b1 = toward(b, inner);
    add_cell(a1, a0, b0);
    add_cell(a1, b0, b1);
    outer = inner;
  }
  Bary vertex{0.0, 0.0, 0.0};
  vertex[s] = 1.0;
  add_cell(vertex, toward(a, outer), toward(b, outer));
  return rule;
}

}  // namespace mrfem
