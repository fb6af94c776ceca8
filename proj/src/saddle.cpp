#include "mrfem/saddle.hpp"

#include <ostream>
#include <string>

#include <Eigen/LU>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

namespace mrfem {

BlockSystem build_block_system(SparseMatrix gram, SparseMatrix enriched, SparseMatrix trial, Eigen::VectorXd load) {
  const Eigen::Index nh = gram.rows();
  const Eigen::Index ny = trial.rows();
  const Eigen::Index nx = trial.cols();
  if (gram.cols() != nh) throw Error("build_block_system: Gram matrix is not square");
  if (enriched.rows() != ny || enriched.cols() != nh) {
    throw Error("build_block_system: B must be " + std::to_string(ny) + "x" + std::to_string(nh));
  }
  if (load.size() != ny) throw Error("build_block_system: load vector length does not match the test space");

  BlockSystem sys{std::move(gram), std::move(enriched), std::move(trial), std::move(load), {}, {}, {}};
  const Eigen::Index n = nh + ny + nx;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(sys.gram.nonZeros() + 2 * sys.enriched.nonZeros() + 2 * sys.trial.nonZeros());
  for (int k = 0; k < sys.gram.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(sys.gram, k); it; ++it) triplets.emplace_back(it.row(), it.col(), it.value());
  }
  for (int k = 0; k < sys.enriched.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(sys.enriched, k); it; ++it) {
      triplets.emplace_back(nh + it.row(), it.col(), -it.value());
      triplets.emplace_back(it.col(), nh + it.row(), -it.value());
    }
  }
  for (int k = 0; k < sys.trial.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(sys.trial, k); it; ++it) {
      triplets.emplace_back(nh + it.row(), nh + ny + it.col(), -it.value());
      triplets.emplace_back(nh + ny + it.col(), nh + it.row(), -it.value());
    }
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.rhs = Eigen::VectorXd::Zero(n);
  sys.rhs.segment(nh, ny) = -sys.load;
  return sys;
}

namespace {

using SparseLU = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

[[noreturn]] void singular(Eigen::Index n) {
  throw InfSupFailure("saddle solve: singular block matrix (" + std::to_string(n) +
                      " unknowns); the space configuration violates an inf-sup condition");
}

// Factorization of the full matrix, either directly or through the Schur
// complement on the unknowns outside the local blocks.
class Factorization {
 public:
  Factorization(const SparseMatrix& a, const std::vector<std::vector<int>>& blocks) : n_(a.rows()) {
    if (blocks.empty()) {
      lu_.analyzePattern(a);
      lu_.factorize(a);
      if (lu_.info() != Eigen::Success) singular(n_);
      return;
    }
    condense(a, blocks);
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& r) const {
    if (interior_.empty()) return lu_.solve(r);
    Eigen::VectorXd ri(interior_.size()), rb(outer_.size());
    for (std::size_t k = 0; k < interior_.size(); ++k) ri[k] = r[interior_[k]];
    for (std::size_t k = 0; k < outer_.size(); ++k) rb[k] = r[outer_[k]];
    const Eigen::VectorXd xb = lu_.solve(rb - a_bi_ * (inv_ * ri));
    const Eigen::VectorXd xi = inv_ * (ri - a_ib_ * xb);
    Eigen::VectorXd x(n_);
    for (std::size_t k = 0; k < interior_.size(); ++k) x[interior_[k]] = xi[k];
    for (std::size_t k = 0; k < outer_.size(); ++k) x[outer_[k]] = xb[k];
    return x;
  }

 private:
  void condense(const SparseMatrix& a, const std::vector<std::vector<int>>& blocks) {
    std::vector<int> where(n_, -1);  // position among interior (>= 0) or outer (< -1) unknowns
    for (const auto& block : blocks) {
      for (int i : block) {
        if (i < 0 || i >= n_ || where[i] != -1) throw Error("saddle solve: invalid local blocks");
        where[i] = static_cast<int>(interior_.size());
        interior_.push_back(i);
      }
    }
    for (int i = 0; i < n_; ++i) {
      if (where[i] == -1) {
        where[i] = -2 - static_cast<int>(outer_.size());
        outer_.push_back(i);
      }
    }
    const Eigen::Index ni = static_cast<Eigen::Index>(interior_.size());
    const Eigen::Index nb = static_cast<Eigen::Index>(outer_.size());

    std::vector<Eigen::Triplet<double>> tib, tbi, tbb;
    for (int k = 0; k < a.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
        const int r = where[it.row()], c = where[it.col()];
        if (r >= 0 && c < 0) tib.emplace_back(r, -2 - c, it.value());
        if (r < 0 && c >= 0) tbi.emplace_back(-2 - r, c, it.value());
        if (r < 0 && c < 0) tbb.emplace_back(-2 - r, -2 - c, it.value());
      }
    }
    a_ib_.resize(ni, nb);
    a_ib_.setFromTriplets(tib.begin(), tib.end());
    a_bi_.resize(nb, ni);
    a_bi_.setFromTriplets(tbi.begin(), tbi.end());

    // Block-diagonal inverse of the interior part.
    std::vector<Eigen::Triplet<double>> tinv;
    int start = 0;
    for (const auto& block : blocks) {
      const int m = static_cast<int>(block.size());
      Eigen::MatrixXd local = Eigen::MatrixXd::Zero(m, m);
      for (int j = 0; j < m; ++j) {
        for (SparseMatrix::InnerIterator it(a, block[j]); it; ++it) {
          const int r = where[it.row()];
          if (r >= start && r < start + m) local(r - start, j) = it.value();
        }
      }
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(local);
      if (!lu.isInvertible()) singular(n_);
      const Eigen::MatrixXd inv = lu.inverse();
      for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
          if (inv(i, j) != 0.0) tinv.emplace_back(start + i, start + j, inv(i, j));
        }
      }
      start += m;
    }
    inv_.resize(ni, ni);
    inv_.setFromTriplets(tinv.begin(), tinv.end());

    SparseMatrix schur(nb, nb);
    schur.setFromTriplets(tbb.begin(), tbb.end());
    schur -= SparseMatrix(a_bi_ * SparseMatrix(inv_ * a_ib_));
    schur.prune(0.0);
    schur.makeCompressed();
    lu_.analyzePattern(schur);
    lu_.factorize(schur);
    if (lu_.info() != Eigen::Success) singular(n_);
  }

  Eigen::Index n_;
  std::vector<int> interior_, outer_;
  SparseMatrix a_ib_, a_bi_, inv_;
  SparseLU lu_;
};

}  // namespace

SolveResult solve(const BlockSystem& system, double tolerance) {
  const Eigen::Index nh = system.enriched_size();
  const Eigen::Index ny = system.test_size();
  const Eigen::Index nx = system.trial_size();
  const double rhs_norm = system.rhs.norm();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(system.matrix.rows());
  double relative = 0.0;
  if (rhs_norm > 0.0) {
    const Factorization f(system.matrix, system.local_blocks);
    x = f.solve(system.rhs);
    Eigen::VectorXd r = system.rhs - system.matrix * x;
    relative = r.norm() / rhs_norm;
    // A few refinement sweeps recover the last digits on badly scaled blocks.
    for (int sweep = 0; sweep < 3 && relative > tolerance; ++sweep) {
      x += f.solve(r);
      r = system.rhs - system.matrix * x;
      relative = r.norm() / rhs_norm;
    }
    if (!x.allFinite()) throw InfSupFailure("saddle solve: non-finite solution");
    if (relative > tolerance) {
      throw SolverError("saddle solve: relative residual " + std::to_string(relative) + " above tolerance");
    }
  }

  SolveResult out;
  out.theta = x.segment(0, nh);
  out.lambda = x.segment(nh, ny);
  out.u = x.segment(nh + ny, nx);
  out.relative_residual = relative;
  return out;
}

std::vector<std::vector<int>> discontinuous_blocks(const SpaceTriple& spaces) {
  const int nt = spaces.mesh->num_triangles();
  std::vector<std::vector<int>> blocks(nt);
  int base = 0;
  for (const ProductSpace* space : {&spaces.enriched, &spaces.test, &spaces.trial}) {
    for (int c = 0; c < space->size(); ++c) {
      const FeSpace& fe = space->component(c);
      if (fe.kind() != SpaceKind::Discontinuous) continue;
      for (int t = 0; t < nt; ++t) {
        for (int d : fe.element_dofs(t)) blocks[t].push_back(base + space->offset(c) + d);
      }
    }
    base += space->ndofs();
  }
  return blocks;
}

BlockSystem assemble_block_system(const SpaceTriple& spaces, const ProblemData& data) {
  BlockSystem sys = build_block_system(assemble_x_gram(spaces.enriched), assemble_g(spaces.enriched, spaces.test),
                                       assemble_g(spaces.trial, spaces.test), assemble_load(spaces.test, data));
  sys.local_blocks = discontinuous_blocks(spaces);
  return sys;
}

void write_matrix_market(std::ostream& os, const SparseMatrix& symmetric) {
  Eigen::Index count = 0;
  for (int k = 0; k < symmetric.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(symmetric, k); it; ++it) count += it.row() >= it.col();
  }
  const auto old_precision = os.precision(17);
  os << "%%MatrixMarket matrix coordinate real symmetric\n";
  os << symmetric.rows() << ' ' << symmetric.cols() << ' ' << count << '\n';
  for (int k = 0; k < symmetric.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(symmetric, k); it; ++it) {
      if (it.row() >= it.col()) os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }
  os.precision(old_precision);
}

}  // namespace mrfem
