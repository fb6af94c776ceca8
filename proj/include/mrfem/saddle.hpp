#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "mrfem/forms.hpp"

namespace mrfem {

/// Raised when the solver cannot produce a solution.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// The block matrix is singular: the trial/test/enriched spaces violate an
/// inf-sup condition.
class InfSupFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Symmetric indefinite system
///
///   [  M  -B^T   0 ] [theta ]   [  0 ]
///   [ -B   0    -C ] [lambda] = [ -f ]
///   [  0  -C^T   0 ] [  u   ]   [  0 ]
///
/// with M the enriched-space Gram matrix, B = G(enriched, test), C = G(trial, test).
struct BlockSystem {
  SparseMatrix gram;      // M
  SparseMatrix enriched;  // B
  SparseMatrix trial;     // C
  Eigen::VectorXd load;   // f
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  /// Groups of system indices that couple only among themselves and to the
  /// remaining unknowns (the discontinuous fields of one element). When
  /// present, solve() eliminates them element by element before factorizing.
  std::vector<std::vector<int>> local_blocks;

  int enriched_size() const { return static_cast<int>(gram.rows()); }
  int test_size() const { return static_cast<int>(trial.rows()); }
  int trial_size() const { return static_cast<int>(trial.cols()); }
};

BlockSystem build_block_system(SparseMatrix gram, SparseMatrix enriched, SparseMatrix trial, Eigen::VectorXd load);

struct SolveResult {
  Eigen::VectorXd theta;   // enriched-space coefficients (theta_1, theta_2)
  Eigen::VectorXd lambda;  // test-space coefficients
  Eigen::VectorXd u;       // trial-space coefficients (p, u)
  double relative_residual = 0.0;
};

/// Sparse LU solve, after static condensation of `local_blocks` when given.
/// Throws InfSupFailure on a singular factorization and SolverError when the
/// relative residual exceeds `tolerance`.
SolveResult solve(const BlockSystem& system, double tolerance = 1e-10);

/// Per element, the system indices of every discontinuous component of the
/// enriched, test and trial spaces (in that block order).
std::vector<std::vector<int>> discontinuous_blocks(const SpaceTriple& spaces);

/// Assembles M, B, C and f on a space triple, with the discontinuous blocks attached.
BlockSystem assemble_block_system(const SpaceTriple& spaces, const ProblemData& data);

/// `%%MatrixMarket matrix coordinate real symmetric`, lower triangle, 1-based.
void write_matrix_market(std::ostream& os, const SparseMatrix& symmetric);

}  // namespace mrfem
