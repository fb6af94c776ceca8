#include "mrfem/problems.hpp"

#include <cmath>
#include <string>

namespace mrfem {

namespace {

// Polar angle in [0, pi] on the upper half plane; y = -0 is folded onto +0.
double polar_angle(double x, double y) { return std::atan2(y <= 0.0 ? 0.0 : y, x); }

}  // namespace

ProblemData singular_problem() {
  ExactSolution exact;
  exact.u = [](double x, double y) { return std::sqrt(std::hypot(x, y)) * std::sin(0.5 * polar_angle(x, y)); };
  exact.grad_u = [](double x, double y) -> std::array<double, 2> {
    const double r = std::hypot(x, y);
    const double phi = polar_angle(x, y);
    const double scale = 0.5 / std::sqrt(r);
    return {-scale * std::sin(0.5 * phi), scale * std::cos(0.5 * phi)};
  };
  exact.singular_point = Vertex{0.0, 0.0};
  exact.regularity = "H^{3/2-eps}, gradient ~ r^{-1/2} at the origin";

  ProblemData data;
  data.name = "singular";
  data.g = [](double, double) { return 0.0; };
  data.h_neumann = [](double, double) { return 0.0; };
  data.h_dirichlet = exact.u;
  data.exact = std::move(exact);
  return data;
}

ProblemData polynomial_problem(int p) {
  if (p < 1) throw Error("polynomial_problem: degree must be >= 1");
  ExactSolution exact;
  exact.u = [p](double x, double y) { return std::pow(x + y, p); };
  exact.grad_u = [p](double x, double y) -> std::array<double, 2> {
    const double d = p * std::pow(x + y, p - 1);
    return {d, d};
  };
  exact.regularity = "polynomial";

  ProblemData data;
  data.name = "poly:" + std::to_string(p);
  data.g = [p](double x, double y) { return p < 2 ? 0.0 : -2.0 * p * (p - 1) * std::pow(x + y, p - 2); };
  // Outward normal on the Neumann part [-1,0]x{0} is (0,-1).
  data.h_neumann = [p](double x, double y) { return -p * std::pow(x + y, p - 1); };
  data.h_dirichlet = exact.u;
  data.exact = std::move(exact);
  return data;
}

QuadRule exact_solution_rule(const Mesh& mesh, int t, int degree, const ExactSolution& exact) {
  if (exact.singular_point) {
    const auto& tri = mesh.triangle(t).v;
    for (int a = 0; a < 3; ++a) {
      const Vertex& v = mesh.vertex(tri[a]);
      if (v.x == exact.singular_point->x && v.y == exact.singular_point->y) {
        return graded_triangle_rule(std::max(degree, kGradedMinDegree), a, kGradedLevels, kGradedRatio);
      }
    }
  }
  return triangle_rule(degree);
}

Eigen::VectorXd interpolate_exact(const ExactSolution& exact, const ProductSpace& space) {
  if (space.size() != 3) throw Error("interpolate_exact: expected a (q_x, q_y, w) product space");
  Eigen::VectorXd c(space.ndofs());
  // Nodes at a singular point (where grad u blows up) get the value 0.
  auto finite = [](double v) { return std::isfinite(v) ? v : 0.0; };
  c.segment(space.offset(0), space.component(0).ndofs()) =
      interpolate(space.component(0), [&](double x, double y) { return finite(exact.grad_u(x, y)[0]); });
  c.segment(space.offset(1), space.component(1).ndofs()) =
      interpolate(space.component(1), [&](double x, double y) { return finite(exact.grad_u(x, y)[1]); });
  c.segment(space.offset(2), space.component(2).ndofs()) =
      interpolate(space.component(2), [&](double x, double y) { return finite(exact.u(x, y)); });
  return c;
}

double x_norm_error(const ExactSolution& exact, const ProductSpace& space, const Eigen::VectorXd& coeffs) {
  if (space.size() != 3) throw Error("x_norm_error: expected a (q_x, q_y, w) product space");
  if (coeffs.size() != space.ndofs()) throw Error("x_norm_error: coefficient length mismatch");
  const Mesh& mesh = space.mesh();
  const FeSpace& flux = space.component(0);
  const FeSpace& scalar = space.component(2);
  const int degree = 2 * std::max(flux.degree(), scalar.degree()) + 6;
  const LagrangeBasis& flux_basis = lagrange_basis(flux.degree());
  const LagrangeBasis& scalar_basis = lagrange_basis(scalar.degree());
  std::vector<double> fv(flux_basis.size()), sv(scalar_basis.size()), sd(3 * scalar_basis.size());

  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry geo = element_geometry(mesh, t);
    const QuadRule rule = exact_solution_rule(mesh, t, degree, exact);
    const auto fd = flux.element_dofs(t);
    const auto wd = scalar.element_dofs(t);
    double local = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Bary& l = rule.points[q];
      flux_basis.values(l, fv);
      scalar_basis.values(l, sv);
      scalar_basis.lambda_derivatives(l, sd);
      double qx = 0.0, qy = 0.0, w = 0.0, dl[3] = {0.0, 0.0, 0.0};
      for (std::size_t i = 0; i < fv.size(); ++i) {
        qx += coeffs[space.offset(0) + fd[i]] * fv[i];
        qy += coeffs[space.offset(1) + fd[i]] * fv[i];
      }
      for (std::size_t i = 0; i < sv.size(); ++i) {
        if (wd[i] < 0) continue;
        const double c = coeffs[space.offset(2) + wd[i]];
        w += c * sv[i];
        for (int a = 0; a < 3; ++a) dl[a] += c * sd[3 * i + a];
      }
      const auto gw = geo.gradient(dl);
      const Vertex x = geo.map(l);
      const auto gu = exact.grad_u(x.x, x.y);
      const double u = exact.u(x.x, x.y);
      const double e = (gu[0] - qx) * (gu[0] - qx) + (gu[1] - qy) * (gu[1] - qy) + (u - w) * (u - w) +
                       (gu[0] - gw[0]) * (gu[0] - gw[0]) + (gu[1] - gw[1]) * (gu[1] - gw[1]);
      local += rule.weights[q] * e;
    }
    sum += local * 2.0 * geo.area;
  }
  return std::sqrt(sum);
}

double true_error(const SolveResult& result, const ExactSolution& exact, const SpaceTriple& spaces) {
  return x_norm_error(exact, spaces.trial, result.u);
}

}  // namespace mrfem
