#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mrfem/mesh.hpp"

namespace mrfem {

using Bary = std::array<double, 3>;
using ScalarField = std::function<double(double x, double y)>;

/// Equispaced nodal Lagrange basis of degree q on the reference triangle,
/// written in barycentric coordinates.
///
/// Node order: the three vertices, then the q-1 nodes of each local edge e
/// (opposite vertex e, running from vertex (e+1)%3 to (e+2)%3), then interior
/// nodes. Degree 0 has a single node at the centroid.
class LagrangeBasis {
 public:
  explicit LagrangeBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  Bary node(int i) const;

  /// Basis values at a point.
  void values(const Bary& l, std::span<double> out) const;
  /// Derivatives with respect to the three barycentric coordinates, row-major (size()*3).
  void lambda_derivatives(const Bary& l, std::span<double> out) const;

 private:
  int degree_;
  std::vector<std::array<int, 3>> nodes_;
};

/// Shared, cached instance per degree.
const LagrangeBasis& lagrange_basis(int degree);

/// Shifted Legendre polynomials P_k(2t-1), k = 0..degree, at t in [0,1].
void legendre_values(int degree, double t, std::span<double> out);

/// Basis values and barycentric derivatives at a list of reference points.
struct Tabulation {
  int npoints = 0;
  int nbasis = 0;
  std::vector<double> values;  // npoints x nbasis
  std::vector<double> dlambda; // npoints x nbasis x 3

  double value(int q, int i) const { return values[q * nbasis + i]; }
  const double* dlam(int q, int i) const { return &dlambda[(q * nbasis + i) * 3]; }
};

Tabulation tabulate(int degree, std::span<const Bary> points);

/// Affine geometry of one triangle.
struct ElementGeometry {
  std::array<Vertex, 3> vertices;
  std::array<std::array<double, 2>, 3> grad_lambda;  // gradients of barycentric coordinates
  double area = 0.0;

  Vertex map(const Bary& l) const;
  Bary barycentric(double x, double y) const;
  /// Physical gradient from barycentric derivatives.
  std::array<double, 2> gradient(const double* dlam) const;
};

ElementGeometry element_geometry(const Mesh& mesh, int t);

enum class SpaceKind { Continuous, Discontinuous, DirichletFacet };

/// Scalar finite element space on a mesh.
///
/// Continuous spaces number vertex, edge and interior dofs through the mesh
/// entities; edge dofs are ordered from the lower vertex id. With a zero
/// trace constraint, dofs on the closed Dirichlet boundary are dropped from
/// the numbering and show up as -1 in element dof lists.
class FeSpace {
 public:
  static FeSpace continuous(std::shared_ptr<const Mesh> mesh, int degree, bool zero_trace_on_dirichlet = false);
  static FeSpace discontinuous(std::shared_ptr<const Mesh> mesh, int degree);
  /// Piecewise polynomials on the Dirichlet facets, Legendre basis per facet.
  static FeSpace dirichlet_facet(std::shared_ptr<const Mesh> mesh, int degree);

  SpaceKind kind() const { return kind_; }
  int degree() const { return degree_; }
  bool zero_trace() const { return zero_trace_; }
  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  int ndofs() const { return ndofs_; }

  /// Dofs per element (volume spaces) or per facet (facet space).
  int local_size() const { return local_size_; }
  std::span<const int> element_dofs(int t) const;
  /// Facet space only; empty for facets outside the Dirichlet boundary.
  std::span<const int> facet_dofs(int e) const;

 private:
  FeSpace(SpaceKind kind, std::shared_ptr<const Mesh> mesh, int degree);

  SpaceKind kind_;
  std::shared_ptr<const Mesh> mesh_;
  int degree_;
  bool zero_trace_ = false;
  int ndofs_ = 0;
  int local_size_ = 0;
  std::vector<int> dofs_;
  std::vector<int> facet_offset_;
};

/// Cartesian product of scalar spaces with block-contiguous global numbering.
class ProductSpace {
 public:
  ProductSpace() = default;
  explicit ProductSpace(std::vector<FeSpace> components);

  int size() const { return static_cast<int>(components_.size()); }
  const FeSpace& component(int i) const { return components_.at(i); }
  int offset(int i) const { return offsets_.at(i); }
  int ndofs() const { return offsets_.empty() ? 0 : offsets_.back(); }
  const Mesh& mesh() const { return components_.front().mesh(); }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return components_.front().mesh_ptr(); }

 private:
  std::vector<FeSpace> components_;
  std::vector<int> offsets_;
};

/// (q_x, q_y, w): two discontinuous flux components and a continuous scalar.
ProductSpace make_flux_scalar_space(std::shared_ptr<const Mesh> mesh, int flux_degree, int scalar_degree);

/// Trial, test and enriched spaces of the mild-weak first order formulation:
///   trial    = S^{-1}_{p-1}^2 x S^0_p
///   test     = S^{-1}_{p-1}^2 x (S^0_{p+1} with zero trace on Gamma_D) x S^{-1}_p(F_D)
///   enriched = S^{-1}_p^2 x S^0_{p+2}
struct SpaceTriple {
  std::shared_ptr<const Mesh> mesh;
  int p = 1;
  ProductSpace trial;
  ProductSpace test;
  ProductSpace enriched;
};

SpaceTriple build_space_triple(std::shared_ptr<const Mesh> mesh, int p);

struct PointValue {
  double value = 0.0;
  std::array<double, 2> gradient{0.0, 0.0};
};

/// Value and physical gradient of a volume FE function at a barycentric point.
PointValue evaluate(const FeSpace& space, std::span<const double> coeffs, int element, const Bary& point);

/// Value of a facet-space function at parameter t in [0,1] along facet e
/// (from its lower to its higher vertex id).
double evaluate_facet(const FeSpace& space, std::span<const double> coeffs, int facet, double t);

/// Nodal interpolant of a scalar field (volume spaces only). Constrained nodes are skipped.
Eigen::VectorXd interpolate(const FeSpace& space, const ScalarField& f);

}  // namespace mrfem
