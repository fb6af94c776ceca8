#include "mrfem/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace mrfem {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr Eigen::Index kSolveChunk = 64;

using SparseLLT = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

double relative_asymmetry(const Eigen::MatrixXd& a) {
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

double min_generalized_eigenvalue(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double* asymmetry) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw EigenSolverFailure("generalized eigenproblem: dimension mismatch");
  }
  if (a.rows() == 0) throw EigenSolverFailure("generalized eigenproblem: empty matrices");
  const double asym = std::max(relative_asymmetry(a), relative_asymmetry(b));
  if (asymmetry) *asymmetry = asym;
  if (!(asym <= kSymmetryTol)) {
    throw EigenSolverFailure("generalized eigenproblem: matrices not symmetric (relative asymmetry " +
                             std::to_string(asym) + ")");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(b);
  if (llt.info() != Eigen::Success) {
    throw EigenSolverFailure("generalized eigenproblem: right-hand matrix is not positive definite");
  }
  // L^{-1} A L^{-T}, then the standard symmetric eigenproblem.
  Eigen::MatrixXd c = a;
  llt.matrixL().solveInPlace(c);
  llt.matrixU().solveInPlace<Eigen::OnTheRight>(c);
  c.triangularView<Eigen::StrictlyUpper>() = c.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EigenSolverFailure("generalized eigenproblem: QR iteration did not converge");
  return es.eigenvalues()[0];
}

Eigen::MatrixXd schur_complement(const SparseMatrix& gram, const SparseMatrix& b, double* raw_asymmetry) {
  if (gram.rows() != b.cols()) throw Error("schur_complement: dimension mismatch");
  SparseLLT chol(gram);
  if (chol.info() != Eigen::Success) throw SolverError("schur_complement: Gram matrix is not positive definite");
  const SparseMatrix bt = b.transpose();
  const Eigen::Index ny = b.rows();
  Eigen::MatrixXd s(ny, ny);
  for (Eigen::Index j0 = 0; j0 < ny; j0 += kSolveChunk) {
    const Eigen::Index k = std::min(kSolveChunk, ny - j0);
    const Eigen::MatrixXd rhs = Eigen::MatrixXd(bt.middleCols(j0, k));
    const Eigen::MatrixXd w = chol.solve(rhs);
    s.middleCols(j0, k) = b * w;
  }
  if (raw_asymmetry) *raw_asymmetry = relative_asymmetry(s);
  // Column solves leave roundoff asymmetry; keep the lower triangle.
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return s;
}

double infsup_from_blocks(const Eigen::MatrixXd& s, const Eigen::MatrixXd& c, const Eigen::MatrixXd& n) {
  if (s.rows() != c.rows() || n.rows() != c.cols()) throw Error("infsup_from_blocks: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    throw TestSpaceNotControlled("practical_infsup: B M^{-1} B^T is singular, the enriched space does not control "
                                 "the test space (mu = 0)");
  }
  // K = C^T S^{-1} C = Z^T Z with Z = L^{-1} C.
  Eigen::MatrixXd z = c;
  llt.matrixL().solveInPlace(z);
  const Eigen::Index nx = z.cols();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nx, nx);
  k.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
  k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
  return std::sqrt(std::max(0.0, min_generalized_eigenvalue(k, n)));
}

namespace {

double beta_from_blocks(const SpaceTriple& spaces, const Eigen::MatrixXd& s) {
  return infsup_from_blocks(s, Eigen::MatrixXd(assemble_g(spaces.trial, spaces.test)),
                            Eigen::MatrixXd(assemble_x_gram(spaces.trial)));
}

Eigen::MatrixXd enriched_schur(const SpaceTriple& spaces, double* raw_asymmetry = nullptr) {
  return schur_complement(assemble_x_gram(spaces.enriched), assemble_g(spaces.enriched, spaces.test), raw_asymmetry);
}

}  // namespace

double practical_infsup(std::shared_ptr<const Mesh> mesh, int p) {
  const SpaceTriple spaces = build_space_triple(mesh, p);
  return beta_from_blocks(spaces, enriched_schur(spaces));
}

namespace {

double mu_from_blocks(const SpaceTriple& spaces, const Eigen::MatrixXd& s, int enrichment, bool refine_proxy,
                      double* asymmetry) {
  if (enrichment < 0) throw Error("mu_estimate: enrichment must be >= 0");
  std::shared_ptr<const Mesh> proxy_mesh = spaces.mesh;
  if (refine_proxy) proxy_mesh = std::make_shared<const Mesh>(refine_uniform(*spaces.mesh));
  const ProductSpace proxy = make_flux_scalar_space(proxy_mesh, spaces.p + enrichment, spaces.p + 2 + enrichment);
  double raw = 0.0;
  const Eigen::MatrixXd s_proxy = schur_complement(assemble_x_gram(proxy), assemble_g(proxy, spaces.test), &raw);
  if (asymmetry) *asymmetry = raw;
  if (Eigen::LLT<Eigen::MatrixXd>(s).info() != Eigen::Success) {
    throw TestSpaceNotControlled("mu_estimate: B M^{-1} B^T is singular (mu = 0)");
  }
  const double lambda = min_generalized_eigenvalue(s, s_proxy);
  return std::sqrt(std::max(0.0, lambda));
}

}  // namespace

double mu_estimate(std::shared_ptr<const Mesh> mesh, int p, int enrichment, bool refine_proxy) {
  const SpaceTriple spaces = build_space_triple(mesh, p);
  return mu_from_blocks(spaces, enriched_schur(spaces), enrichment, refine_proxy, nullptr);
}

InfSupReport infsup_report(std::shared_ptr<const Mesh> mesh, int p, int enrichment) {
  const SpaceTriple spaces = build_space_triple(mesh, p);
  InfSupReport report;
  report.p = p;
  report.trial_dofs = spaces.trial.ndofs();
  report.test_dofs = spaces.test.ndofs();
  report.enriched_dofs = spaces.enriched.ndofs();
  double raw = 0.0;
  const Eigen::MatrixXd s = enriched_schur(spaces, &raw);
  report.max_asymmetry = raw;
  report.beta = beta_from_blocks(spaces, s);
  double asym = 0.0;
  report.mu_estimate = mu_from_blocks(spaces, s, enrichment, true, &asym);
  report.max_asymmetry = std::max(report.max_asymmetry, asym);
  return report;
}

BestApproximation best_approximation(const ExactSolution& exact, const SpaceTriple& spaces) {
  const ProductSpace& x = spaces.trial;
  const Mesh& mesh = x.mesh();
  const FeSpace& flux = x.component(0);
  const FeSpace& scalar = x.component(2);
  const int degree = 2 * std::max(flux.degree(), scalar.degree()) + 6;
  const LagrangeBasis& flux_basis = lagrange_basis(flux.degree());
  const LagrangeBasis& scalar_basis = lagrange_basis(scalar.degree());
  std::vector<double> fv(flux_basis.size()), sv(scalar_basis.size()), sd(3 * scalar_basis.size());

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(x.ndofs());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry geo = element_geometry(mesh, t);
    const QuadRule rule = exact_solution_rule(mesh, t, degree, exact);
    const auto fd = flux.element_dofs(t);
    const auto wd = scalar.element_dofs(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Bary& l = rule.points[q];
      const Vertex pt = geo.map(l);
      const double w = rule.weights[q] * 2.0 * geo.area;
      const auto gu = exact.grad_u(pt.x, pt.y);
      const double u = exact.u(pt.x, pt.y);
      flux_basis.values(l, fv);
      scalar_basis.values(l, sv);
      scalar_basis.lambda_derivatives(l, sd);
      for (std::size_t i = 0; i < fv.size(); ++i) {
        rhs[x.offset(0) + fd[i]] += w * gu[0] * fv[i];
        rhs[x.offset(1) + fd[i]] += w * gu[1] * fv[i];
      }
      for (std::size_t i = 0; i < sv.size(); ++i) {
        const auto g = geo.gradient(&sd[3 * i]);
        rhs[x.offset(2) + wd[i]] += w * (u * sv[i] + gu[0] * g[0] + gu[1] * g[1]);
      }
    }
  }

  SparseLLT chol(assemble_x_gram(x));
  if (chol.info() != Eigen::Success) throw SolverError("best_approximation: trial Gram matrix is not positive definite");
  BestApproximation out;
  out.coeffs = chol.solve(rhs);
  out.error = x_norm_error(exact, x, out.coeffs);
  return out;
}

}  // namespace mrfem
