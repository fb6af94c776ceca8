#pragma once

#include <memory>

#include <Eigen/Core>

#include "mrfem/problems.hpp"
#include "mrfem/saddle.hpp"

namespace mrfem {

/// B M^{-1} B^T is singular: the enriched space does not control the test space.
class TestSpaceNotControlled : public SolverError {
 public:
  using SolverError::SolverError;
};

/// The dense eigensolver did not converge or was handed invalid matrices.
class EigenSolverFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

struct InfSupReport {
  double beta = 0.0;
  double mu_estimate = 0.0;
  int p = 0;
  int trial_dofs = 0;
  int test_dofs = 0;
  int enriched_dofs = 0;
  double max_asymmetry = 0.0;  // largest roundoff asymmetry of the computed Schur complements
};

/// Smallest eigenvalue of a x = lambda b x for symmetric a and SPD b.
/// Throws EigenSolverFailure when the matrices are not symmetric to 1e-12
/// (relative) or b is not positive definite.
double min_generalized_eigenvalue(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double* asymmetry = nullptr);

/// Dense S = B M^{-1} B^T for SPD sparse M, symmetrized from its lower
/// triangle. `raw_asymmetry` receives the relative asymmetry before that step.
Eigen::MatrixXd schur_complement(const SparseMatrix& gram, const SparseMatrix& b, double* raw_asymmetry = nullptr);

/// sqrt(lambda_min) of C^T S^{-1} C x = lambda N x for dense blocks.
/// Throws TestSpaceNotControlled when S is not positive definite.
double infsup_from_blocks(const Eigen::MatrixXd& s, const Eigen::MatrixXd& c, const Eigen::MatrixXd& n);

/// Practical inf-sup constant: beta^2 = lambda_min(N^{-1} C^T S^{-1} C) with
/// N the trial Gram matrix, C = G(trial, test), S = B M^{-1} B^T.
double practical_infsup(std::shared_ptr<const Mesh> mesh, int p);

/// min over test functions v of ||G'v||_{enriched'} / ||G'v||_{proxy'}, where
/// the proxy space raises both degrees by `enrichment` and, when
/// `refine_proxy` is set, lives on the uniformly refined mesh.
double mu_estimate(std::shared_ptr<const Mesh> mesh, int p, int enrichment, bool refine_proxy = true);

/// beta and mu together, sharing the assembled blocks.
InfSupReport infsup_report(std::shared_ptr<const Mesh> mesh, int p, int enrichment = 2);

struct BestApproximation {
  Eigen::VectorXd coeffs;
  double error = 0.0;
};

/// X-orthogonal projection of (grad u, u) onto the trial space.
BestApproximation best_approximation(const ExactSolution& exact, const SpaceTriple& spaces);

}  // namespace mrfem
