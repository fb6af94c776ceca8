#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "mrfem/spaces.hpp"

namespace mrfem {

using SparseMatrix = Eigen::SparseMatrix<double>;
using VectorField = std::function<std::array<double, 2>(double x, double y)>;

struct ExactSolution {
  ScalarField u;
  VectorField grad_u;  // also the flux p
  /// Point where u is singular; elements having it as a vertex get graded quadrature.
  std::optional<Vertex> singular_point;
  std::string regularity;
};

/// Data of -div(A grad u) = g with u = h_D on Gamma_D and grad u . n = h_N on Gamma_N.
struct ProblemData {
  std::string name;
  ScalarField g;
  ScalarField h_dirichlet;
  ScalarField h_neumann;
  std::optional<ExactSolution> exact;
};

/// Per-element constant diffusion tensor, row-major 2x2. Identity when unset.
using DiffusionCoefficient = std::function<std::array<double, 4>(int element)>;

/// Local dense Gram matrix of <(q,w),(q',w')> = int q.q' + w w' + grad w . grad w'
/// on one element, with the global indices of its rows (-1 = constrained).
struct ElementGram {
  Eigen::MatrixXd matrix;
  std::vector<int> dofs;
};

ElementGram element_x_gram(const ProductSpace& space, int element);

/// Per-element squared L2^2 x H^1 norms of a coefficient vector.
std::vector<double> element_x_norms_squared(const ProductSpace& space, const Eigen::VectorXd& coeffs);

/// Matrix of (G(q,w))(v1,v2,v3) = int (q - A grad w).v1 + q.grad v2 dx + int_{Gamma_D} w v3 ds.
///
/// Rows: test dofs (v1_x, v1_y, v2, v3). Columns: trial dofs (q_x, q_y, w).
/// The trial mesh is either the test mesh or a refinement of it whose
/// parent() points into the test mesh.
SparseMatrix assemble_g(const ProductSpace& trial, const ProductSpace& test,
                        const DiffusionCoefficient& diffusion = {});

/// Gram matrix of the L2^2 x H^1 inner product on a (q_x, q_y, w) space.
SparseMatrix assemble_x_gram(const ProductSpace& space);

/// f(v) = int g v2 dx + int_{Gamma_N} h_N v2 ds + int_{Gamma_D} h_D v3 ds.
Eigen::VectorXd assemble_load(const ProductSpace& test, const ProblemData& data);

}  // namespace mrfem
