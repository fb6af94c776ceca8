#pragma once

#include "mrfem/forms.hpp"
#include "mrfem/quadrature.hpp"
#include "mrfem/saddle.hpp"

namespace mrfem {

/// Graded rule parameters used wherever an exact solution is integrated on an
/// element touching its singular point.
inline constexpr int kGradedLevels = 20;
inline constexpr double kGradedRatio = 0.5;
/// Lowest cell degree on graded elements; r^{-1/2} integrands need it for 1e-8 relative accuracy.
inline constexpr int kGradedMinDegree = 16;

/// u(r, phi) = r^{1/2} sin(phi/2) on (-1,1)x(0,1): g = 0, h_N = 0, h_D = trace of u.
ProblemData singular_problem();

/// u = (x + y)^p with g = -Laplace u and consistent boundary data. Both u and
/// grad u lie in the degree-p trial space on every mesh.
ProblemData polynomial_problem(int p);

/// Reference rule for integrating an exact solution (times polynomials of the
/// given total degree) on element t: graded toward the singular point when it
/// is a vertex of t, plain otherwise.
QuadRule exact_solution_rule(const Mesh& mesh, int t, int degree, const ExactSolution& exact);

/// Nodal interpolant of (grad u, u) in a (q_x, q_y, w) product space. Nodes
/// where the exact field is not finite (the singular point) get 0.
Eigen::VectorXd interpolate_exact(const ExactSolution& exact, const ProductSpace& space);

/// sqrt(||p - q_h||^2_{L2(Omega)^2} + ||u - w_h||^2_{H1(Omega)}) for coefficients of a (q_x, q_y, w) space.
double x_norm_error(const ExactSolution& exact, const ProductSpace& space, const Eigen::VectorXd& coeffs);

/// X-norm error of the trial block of a solve.
double true_error(const SolveResult& result, const ExactSolution& exact, const SpaceTriple& spaces);

}  // namespace mrfem
