#include "mrfem/forms.hpp"

#include <algorithm>
#include <cmath>

#include "mrfem/quadrature.hpp"

namespace mrfem {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

constexpr double kOnEdgeTol = 1e-10;

// Local index of vertex id `v` in triangle t.
int local_vertex(const Mesh& mesh, int t, int v) {
  const auto& tri = mesh.triangle(t).v;
  for (int a = 0; a < 3; ++a) {
    if (tri[a] == v) return a;
  }
  throw Error("forms: vertex not in triangle");
}

// Barycentric point on the facet of triangle t running from vertex id v0 to v1.
Bary facet_point(const Mesh& mesh, int t, int v0, int v1, double s) {
  Bary l{0.0, 0.0, 0.0};
  l[local_vertex(mesh, t, v0)] = 1.0 - s;
  l[local_vertex(mesh, t, v1)] = s;
  return l;
}

class GramKernel {
 public:
  explicit GramKernel(const ProductSpace& space)
      : space_(space),
        flux_degree_(space.component(0).degree()),
        scalar_degree_(space.component(2).degree()),
        rule_(triangle_rule(std::max(2 * flux_degree_, 2 * scalar_degree_))),
        flux_tab_(tabulate(flux_degree_, rule_.points)),
        scalar_tab_(tabulate(scalar_degree_, rule_.points)) {
    if (space.size() != 3) throw Error("gram: expected a (q_x, q_y, w) product space");
  }

  ElementGram compute(int t) const {
    const ElementGeometry geo = element_geometry(space_.mesh(), t);
    const int nq = flux_tab_.nbasis;
    const int nw = scalar_tab_.nbasis;
    ElementGram out;
    out.matrix = Eigen::MatrixXd::Zero(2 * nq + nw, 2 * nq + nw);
    std::vector<std::array<double, 2>> grad(nw);
    for (int q = 0; q < flux_tab_.npoints; ++q) {
      const double w = rule_.weights[q] * 2.0 * geo.area;
      for (int i = 0; i < nq; ++i) {
        for (int j = 0; j < nq; ++j) {
          const double m = w * flux_tab_.value(q, i) * flux_tab_.value(q, j);
          out.matrix(i, j) += m;
          out.matrix(nq + i, nq + j) += m;
        }
      }
      for (int j = 0; j < nw; ++j) grad[j] = geo.gradient(scalar_tab_.dlam(q, j));
      for (int i = 0; i < nw; ++i) {
        for (int j = 0; j < nw; ++j) {
          out.matrix(2 * nq + i, 2 * nq + j) +=
              w * (scalar_tab_.value(q, i) * scalar_tab_.value(q, j) + grad[i][0] * grad[j][0] +
                   grad[i][1] * grad[j][1]);
        }
      }
    }
    // Products above accumulate in a different rounding order; keep the lower triangle.
    out.matrix.triangularView<Eigen::StrictlyUpper>() = out.matrix.transpose();
    out.dofs.reserve(2 * nq + nw);
    for (int c = 0; c < 3; ++c) {
      for (int d : space_.component(c).element_dofs(t)) out.dofs.push_back(d < 0 ? -1 : space_.offset(c) + d);
    }
    return out;
  }

 private:
  const ProductSpace& space_;
  int flux_degree_;
  int scalar_degree_;
  QuadRule rule_;
  Tabulation flux_tab_;
  Tabulation scalar_tab_;
};

void scatter(Triplets& triplets, const Eigen::MatrixXd& local, std::span<const int> rows, std::span<const int> cols) {
  for (int i = 0; i < local.rows(); ++i) {
    if (rows[i] < 0) continue;
    for (int j = 0; j < local.cols(); ++j) {
      if (cols[j] < 0 || local(i, j) == 0.0) continue;
      triplets.emplace_back(rows[i], cols[j], local(i, j));
    }
  }
}

std::vector<int> product_dofs(const ProductSpace& space, std::initializer_list<int> components, int t) {
  std::vector<int> dofs;
  for (int c : components) {
    for (int d : space.component(c).element_dofs(t)) dofs.push_back(d < 0 ? -1 : space.offset(c) + d);
  }
  return dofs;
}

}  // namespace

ElementGram element_x_gram(const ProductSpace& space, int element) { return GramKernel(space).compute(element); }

std::vector<double> element_x_norms_squared(const ProductSpace& space, const Eigen::VectorXd& coeffs) {
  if (coeffs.size() != space.ndofs()) throw Error("element_x_norms_squared: coefficient length mismatch");
  const GramKernel kernel(space);
  std::vector<double> out(space.mesh().num_triangles());
  Eigen::VectorXd local;
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const ElementGram g = kernel.compute(t);
    local.resize(static_cast<Eigen::Index>(g.dofs.size()));
    for (std::size_t i = 0; i < g.dofs.size(); ++i) local[i] = g.dofs[i] < 0 ? 0.0 : coeffs[g.dofs[i]];
    out[t] = std::max(0.0, local.dot(g.matrix * local));
  }
  return out;
}

SparseMatrix assemble_x_gram(const ProductSpace& space) {
  const GramKernel kernel(space);
  Triplets triplets;
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const ElementGram g = kernel.compute(t);
    scatter(triplets, g.matrix, g.dofs, g.dofs);
  }
  SparseMatrix m(space.ndofs(), space.ndofs());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

SparseMatrix assemble_g(const ProductSpace& trial, const ProductSpace& test, const DiffusionCoefficient& diffusion) {
  if (trial.size() != 3) throw Error("assemble_g: trial space must have components (q_x, q_y, w)");
  if (test.size() != 4) throw Error("assemble_g: test space must have components (v1_x, v1_y, v2, v3)");
  const Mesh& trial_mesh = trial.mesh();
  const Mesh& test_mesh = test.mesh();
  const bool same_mesh = trial.mesh_ptr() == test.mesh_ptr();
  if (!same_mesh && trial_mesh.parent_id() != test_mesh.id()) {
    throw Error("assemble_g: trial mesh is neither the test mesh nor a refinement of it");
  }

  const FeSpace& flux = trial.component(0);
  const FeSpace& scalar = trial.component(2);
  const FeSpace& v1 = test.component(0);
  const FeSpace& v2 = test.component(2);
  const FeSpace& v3 = test.component(3);
  if (v3.kind() != SpaceKind::DirichletFacet) throw Error("assemble_g: fourth test component must be a facet space");

  const int dq = flux.degree();
  const int dw = scalar.degree();
  const int d1 = v1.degree();
  const int d2 = v2.degree();
  const int degree = std::max({dq + d1, dw - 1 + d1, dq + d2 - 1, 0});
  const QuadRule rule = triangle_rule(degree);
  const Tabulation flux_tab = tabulate(dq, rule.points);
  const Tabulation scalar_tab = tabulate(dw, rule.points);
  Tabulation v1_tab = tabulate(d1, rule.points);
  Tabulation v2_tab = tabulate(d2, rule.points);

  const int nq = flux_tab.nbasis;
  const int nw = scalar_tab.nbasis;
  const int n1 = v1_tab.nbasis;
  const int n2 = v2_tab.nbasis;

  Triplets triplets;
  triplets.reserve(static_cast<std::size_t>(trial_mesh.num_triangles()) * (2 * n1 * (nq + nw) + 2 * n2 * nq));
  Eigen::MatrixXd local(2 * n1 + n2, 2 * nq + nw);
  std::vector<std::array<double, 2>> grad_w(nw), grad_v2(n2);
  std::vector<Bary> mapped(rule.size());

  for (int t = 0; t < trial_mesh.num_triangles(); ++t) {
    const ElementGeometry geo = element_geometry(trial_mesh, t);
    const int s = same_mesh ? t : trial_mesh.parent()[t];
    const ElementGeometry test_geo = same_mesh ? geo : element_geometry(test_mesh, s);
    if (!same_mesh) {
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vertex x = geo.map(rule.points[q]);
        mapped[q] = test_geo.barycentric(x.x, x.y);
      }
      v1_tab = tabulate(d1, mapped);
      v2_tab = tabulate(d2, mapped);
    }
    std::array<double, 4> a{1.0, 0.0, 0.0, 1.0};
    if (diffusion) a = diffusion(s);

    local.setZero();
    for (int q = 0; q < flux_tab.npoints; ++q) {
      const double w = rule.weights[q] * 2.0 * geo.area;
      for (int j = 0; j < nw; ++j) {
        const auto g = geo.gradient(scalar_tab.dlam(q, j));
        grad_w[j] = {a[0] * g[0] + a[1] * g[1], a[2] * g[0] + a[3] * g[1]};
      }
      for (int i = 0; i < n2; ++i) grad_v2[i] = test_geo.gradient(v2_tab.dlam(q, i));
      for (int i = 0; i < n1; ++i) {
        const double wv = w * v1_tab.value(q, i);
        for (int j = 0; j < nq; ++j) {
          const double m = wv * flux_tab.value(q, j);
          local(i, j) += m;
          local(n1 + i, nq + j) += m;
        }
        for (int j = 0; j < nw; ++j) {
          local(i, 2 * nq + j) -= wv * grad_w[j][0];
          local(n1 + i, 2 * nq + j) -= wv * grad_w[j][1];
        }
      }
      for (int i = 0; i < n2; ++i) {
        for (int j = 0; j < nq; ++j) {
          const double m = w * flux_tab.value(q, j);
          local(2 * n1 + i, j) += m * grad_v2[i][0];
          local(2 * n1 + i, nq + j) += m * grad_v2[i][1];
        }
      }
    }
    scatter(triplets, local, product_dofs(test, {0, 1, 2}, s), product_dofs(trial, {0, 1, 2}, t));
  }

  // Boundary term int_{Gamma_D} w v3 ds.
  const QuadRule seg = segment_rule(dw + v3.degree());
  const LagrangeBasis& scalar_basis = lagrange_basis(dw);
  std::vector<double> phi(nw), psi(v3.degree() + 1);
  Eigen::MatrixXd facet_local(v3.degree() + 1, nw);
  for (int e = 0; e < trial_mesh.num_facets(); ++e) {
    const Facet& f = trial_mesh.facet(e);
    if (f.label != FacetLabel::Dirichlet) continue;
    const int t = trial_mesh.facet_triangles(e)[0];
    const double length = trial_mesh.facet_length(e);

    int test_facet = e;
    int param_vertex = -1;  // local vertex of the test triangle whose barycentric is the facet parameter
    ElementGeometry test_geo;
    if (!same_mesh) {
      const int s = trial_mesh.parent()[t];
      test_geo = element_geometry(test_mesh, s);
      const Vertex& p0 = trial_mesh.vertex(f.v[0]);
      const Vertex& p1 = trial_mesh.vertex(f.v[1]);
      const Bary l0 = test_geo.barycentric(p0.x, p0.y);
      const Bary l1 = test_geo.barycentric(p1.x, p1.y);
      int edge = -1;
      for (int c = 0; c < 3; ++c) {
        if (std::abs(l0[c]) < kOnEdgeTol && std::abs(l1[c]) < kOnEdgeTol) edge = c;
      }
      if (edge < 0) throw Error("assemble_g: refined Dirichlet facet not contained in a parent facet");
      test_facet = test_mesh.triangle_facet(s, edge);
      param_vertex = local_vertex(test_mesh, s, test_mesh.facet(test_facet).v[1]);
    }
    const auto v3_dofs = v3.facet_dofs(test_facet);
    if (v3_dofs.empty()) throw Error("assemble_g: Dirichlet facet without facet-space dofs");

    facet_local.setZero();
    for (std::size_t q = 0; q < seg.size(); ++q) {
      const double s = seg.points[q][0];
      const Bary l = facet_point(trial_mesh, t, f.v[0], f.v[1], s);
      scalar_basis.values(l, phi);
      double param = s;
      if (!same_mesh) {
        const Vertex& p0 = trial_mesh.vertex(f.v[0]);
        const Vertex& p1 = trial_mesh.vertex(f.v[1]);
        param = test_geo.barycentric((1 - s) * p0.x + s * p1.x, (1 - s) * p0.y + s * p1.y)[param_vertex];
      }
      legendre_values(v3.degree(), param, psi);
      const double w = seg.weights[q] * length;
      for (int i = 0; i <= v3.degree(); ++i) {
        for (int j = 0; j < nw; ++j) facet_local(i, j) += w * psi[i] * phi[j];
      }
    }
    std::vector<int> rows(v3_dofs.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = test.offset(3) + v3_dofs[i];
    std::vector<int> cols;
    for (int d : scalar.element_dofs(t)) cols.push_back(trial.offset(2) + d);
    scatter(triplets, facet_local, rows, cols);
  }

  SparseMatrix g(test.ndofs(), trial.ndofs());
  g.setFromTriplets(triplets.begin(), triplets.end());
  return g;
}

Eigen::VectorXd assemble_load(const ProductSpace& test, const ProblemData& data) {
  if (test.size() != 4) throw Error("assemble_load: test space must have components (v1_x, v1_y, v2, v3)");
  const Mesh& mesh = test.mesh();
  const FeSpace& v2 = test.component(2);
  const FeSpace& v3 = test.component(3);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(test.ndofs());
  const int extra = 8;

  const LagrangeBasis& basis = lagrange_basis(v2.degree());
  const int n2 = basis.size();
  if (data.g) {
    const QuadRule rule = triangle_rule(v2.degree() + extra);
    const Tabulation tab = tabulate(v2.degree(), rule.points);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const ElementGeometry geo = element_geometry(mesh, t);
      const auto dofs = v2.element_dofs(t);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vertex x = geo.map(rule.points[q]);
        const double w = rule.weights[q] * 2.0 * geo.area * data.g(x.x, x.y);
        for (int i = 0; i < n2; ++i) {
          if (dofs[i] >= 0) f[test.offset(2) + dofs[i]] += w * tab.value(q, i);
        }
      }
    }
  }

  std::vector<double> phi(n2), psi(v3.degree() + 1);
  const QuadRule seg_n = segment_rule(v2.degree() + extra);
  // Dirichlet data is not polynomial in general; it gets a generous rule.
  const QuadRule seg_d = segment_rule(v3.degree() + 3 * extra);
  for (int e = 0; e < mesh.num_facets(); ++e) {
    const Facet& facet = mesh.facet(e);
    const Vertex& p0 = mesh.vertex(facet.v[0]);
    const Vertex& p1 = mesh.vertex(facet.v[1]);
    const double length = mesh.facet_length(e);
    if (facet.label == FacetLabel::Neumann && data.h_neumann) {
      const int t = mesh.facet_triangles(e)[0];
      const auto dofs = v2.element_dofs(t);
      for (std::size_t q = 0; q < seg_n.size(); ++q) {
        const double s = seg_n.points[q][0];
        basis.values(facet_point(mesh, t, facet.v[0], facet.v[1], s), phi);
        const double w = seg_n.weights[q] * length * data.h_neumann((1 - s) * p0.x + s * p1.x, (1 - s) * p0.y + s * p1.y);
        for (int i = 0; i < n2; ++i) {
          if (dofs[i] >= 0) f[test.offset(2) + dofs[i]] += w * phi[i];
        }
      }
    } else if (facet.label == FacetLabel::Dirichlet && data.h_dirichlet) {
      const auto dofs = v3.facet_dofs(e);
      for (std::size_t q = 0; q < seg_d.size(); ++q) {
        const double s = seg_d.points[q][0];
        legendre_values(v3.degree(), s, psi);
        const double w =
            seg_d.weights[q] * length * data.h_dirichlet((1 - s) * p0.x + s * p1.x, (1 - s) * p0.y + s * p1.y);
        for (std::size_t i = 0; i < dofs.size(); ++i) f[test.offset(3) + dofs[i]] += w * psi[i];
      }
    }
  }
  return f;
}

}  // namespace mrfem
