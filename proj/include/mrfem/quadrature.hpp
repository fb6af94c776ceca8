#pragma once

#include <array>
#include <vector>

namespace mrfem {

/// Quadrature rule on the reference triangle (barycentric points, weights
/// summing to 1/2) or on the unit interval (points in [0,1], weights summing
/// to 1). `degree` is the polynomial degree integrated exactly.
struct QuadRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// n-point Gauss-Legendre rule on [0,1] (points in the first coordinate).
QuadRule gauss_legendre(int npoints);

/// Gauss rule on [0,1] exact for polynomials of the given degree.
QuadRule segment_rule(int degree);

/// Collapsed-coordinate tensor Gauss rule on the reference triangle, exact for
/// total degree `degree`.
QuadRule triangle_rule(int degree);

/// Composite rule refined geometrically toward one vertex of the reference
/// triangle: `levels` trapezoidal layers with scale factor `ratio`, each split
/// into two cells carrying triangle_rule(degree), plus the innermost triangle.
/// Meant for integrands with an algebraic singularity at that vertex.
QuadRule graded_triangle_rule(int degree, int singular_vertex, int levels, double ratio);

}  // namespace mrfem
