#include "mrfem/spaces.hpp"

#include <map>
#include <mutex>
#include <string>

namespace mrfem {

LagrangeBasis::LagrangeBasis(int degree) : degree_(degree) {
  if (degree < 0) throw Error("lagrange basis: negative degree");
  const int q = degree;
  if (q == 0) {
    nodes_.push_back({0, 0, 0});
    return;
  }
  for (int a = 0; a < 3; ++a) {
    std::array<int, 3> n{0, 0, 0};
    n[a] = q;
    nodes_.push_back(n);
  }
  for (int e = 0; e < 3; ++e) {
    const int a = (e + 1) % 3;
    const int b = (e + 2) % 3;
    for (int k = 1; k < q; ++k) {
      std::array<int, 3> n{0, 0, 0};
      n[a] = q - k;
      n[b] = k;
      nodes_.push_back(n);
    }
  }
  for (int i = 1; i < q; ++i) {
    for (int j = 1; i + j < q; ++j) nodes_.push_back({i, j, q - i - j});
  }
}

Bary LagrangeBasis::node(int i) const {
  if (degree_ == 0) return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  const auto& n = nodes_.at(i);
  return {double(n[0]) / degree_, double(n[1]) / degree_, double(n[2]) / degree_};
}

namespace {

// R_m(l) = prod_{s<m} (q l - s)/(s+1) and its derivative, m = 0..q.
void silvester_factors(int q, double l, double* r, double* dr) {
  r[0] = 1.0;
  dr[0] = 0.0;
  for (int m = 1; m <= q; ++m) {
    const double f = (q * l - (m - 1)) / m;
    r[m] = r[m - 1] * f;
    dr[m] = dr[m - 1] * f + r[m - 1] * (double(q) / m);
  }
}

constexpr int kMaxDegree = 16;

}  // namespace

void LagrangeBasis::values(const Bary& l, std::span<double> out) const {
  if (degree_ == 0) {
    out[0] = 1.0;
    return;
  }
  double r[3][kMaxDegree + 1];
  double dr[3][kMaxDegree + 1];
  for (int a = 0; a < 3; ++a) silvester_factors(degree_, l[a], r[a], dr[a]);
  for (int i = 0; i < size(); ++i) {
    const auto& n = nodes_[i];
    out[i] = r[0][n[0]] * r[1][n[1]] * r[2][n[2]];
  }
}

void LagrangeBasis::lambda_derivatives(const Bary& l, std::span<double> out) const {
  if (degree_ == 0) {
    out[0] = out[1] = out[2] = 0.0;
    return;
  }
  double r[3][kMaxDegree + 1];
  double dr[3][kMaxDegree + 1];
  for (int a = 0; a < 3; ++a) silvester_factors(degree_, l[a], r[a], dr[a]);
  for (int i = 0; i < size(); ++i) {
    const auto& n = nodes_[i];
    out[3 * i + 0] = dr[0][n[0]] * r[1][n[1]] * r[2][n[2]];
    out[3 * i + 1] = r[0][n[0]] * dr[1][n[1]] * r[2][n[2]];
    out[3 * i + 2] = r[0][n[0]] * r[1][n[1]] * dr[2][n[2]];
  }
}

const LagrangeBasis& lagrange_basis(int degree) {
  if (degree < 0 || degree > kMaxDegree) throw Error("lagrange basis: degree out of range");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<LagrangeBasis>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[degree];
  if (!slot) slot = std::make_unique<LagrangeBasis>(degree);
  return *slot;
}

void legendre_values(int degree, double t, std::span<double> out) {
  const double x = 2.0 * t - 1.0;
  out[0] = 1.0;
  if (degree >= 1) out[1] = x;
  for (int k = 2; k <= degree; ++k) out[k] = ((2.0 * k - 1.0) * x * out[k - 1] - (k - 1.0) * out[k - 2]) / k;
}

Tabulation tabulate(int degree, std::span<const Bary> points) {
  const LagrangeBasis& basis = lagrange_basis(degree);
  Tabulation tab;
  tab.npoints = static_cast<int>(points.size());
  tab.nbasis = basis.size();
  tab.values.resize(tab.npoints * tab.nbasis);
  tab.dlambda.resize(tab.npoints * tab.nbasis * 3);
  for (int q = 0; q < tab.npoints; ++q) {
    basis.values(points[q], std::span(tab.values).subspan(q * tab.nbasis, tab.nbasis));
    basis.lambda_derivatives(points[q], std::span(tab.dlambda).subspan(q * tab.nbasis * 3, tab.nbasis * 3));
  }
  return tab;
}

Vertex ElementGeometry::map(const Bary& l) const {
  return {l[0] * vertices[0].x + l[1] * vertices[1].x + l[2] * vertices[2].x,
          l[0] * vertices[0].y + l[1] * vertices[1].y + l[2] * vertices[2].y};
}

Bary ElementGeometry::barycentric(double x, double y) const {
  Bary l{};
  for (int a = 0; a < 3; ++a) {
    const auto& o = vertices[(a + 1) % 3];
    l[a] = grad_lambda[a][0] * (x - o.x) + grad_lambda[a][1] * (y - o.y);
  }
  return l;
}

std::array<double, 2> ElementGeometry::gradient(const double* dlam) const {
  return {dlam[0] * grad_lambda[0][0] + dlam[1] * grad_lambda[1][0] + dlam[2] * grad_lambda[2][0],
          dlam[0] * grad_lambda[0][1] + dlam[1] * grad_lambda[1][1] + dlam[2] * grad_lambda[2][1]};
}

ElementGeometry element_geometry(const Mesh& mesh, int t) {
  ElementGeometry g;
  const auto& tri = mesh.triangle(t);
  for (int a = 0; a < 3; ++a) g.vertices[a] = mesh.vertex(tri.v[a]);
  g.area = mesh.area(t);
  const double twice = 2.0 * g.area;
  for (int a = 0; a < 3; ++a) {
    // grad lambda_a is the inward normal of the opposite edge scaled by 1/(2|T|).
    const auto& p = g.vertices[(a + 1) % 3];
    const auto& q = g.vertices[(a + 2) % 3];
    g.grad_lambda[a] = {(p.y - q.y) / twice, (q.x - p.x) / twice};
  }
  return g;
}

FeSpace::FeSpace(SpaceKind kind, std::shared_ptr<const Mesh> mesh, int degree)
    : kind_(kind), mesh_(std::move(mesh)), degree_(degree) {
  if (!mesh_) throw Error("fe space: null mesh");
  if (degree < 0) throw Error("fe space: negative degree");
}

FeSpace FeSpace::continuous(std::shared_ptr<const Mesh> mesh, int degree, bool zero_trace_on_dirichlet) {
  if (degree < 1) throw Error("fe space: continuous spaces need degree >= 1");
  FeSpace space(SpaceKind::Continuous, std::move(mesh), degree);
  space.zero_trace_ = zero_trace_on_dirichlet;
  const Mesh& m = *space.mesh_;
  const int q = degree;
  const int nv = m.num_vertices();
  const int ne = m.num_facets();
  const int per_edge = q - 1;
  const int per_cell = (q - 1) * (q - 2) / 2;
  const int raw_count = nv + per_edge * ne + per_cell * m.num_triangles();

  std::vector<char> constrained(raw_count, 0);
  if (zero_trace_on_dirichlet) {
    for (int e = 0; e < ne; ++e) {
      const auto& f = m.facet(e);
      if (f.label != FacetLabel::Dirichlet) continue;
      constrained[f.v[0]] = constrained[f.v[1]] = 1;
      for (int k = 0; k < per_edge; ++k) constrained[nv + e * per_edge + k] = 1;
    }
  }
  std::vector<int> renumber(raw_count, -1);
  int next = 0;
  for (int i = 0; i < raw_count; ++i) {
    if (!constrained[i]) renumber[i] = next++;
  }
  space.ndofs_ = next;

  const LagrangeBasis& basis = lagrange_basis(q);
  space.local_size_ = basis.size();
  space.dofs_.resize(static_cast<std::size_t>(m.num_triangles()) * space.local_size_);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& v = m.triangle(t).v;
    int* dofs = &space.dofs_[static_cast<std::size_t>(t) * space.local_size_];
    int local = 0;
    for (int a = 0; a < 3; ++a) dofs[local++] = renumber[v[a]];
    for (int e = 0; e < 3; ++e) {
      const int va = v[(e + 1) % 3];
      const int vb = v[(e + 2) % 3];
      const int facet = m.triangle_facet(t, e);
      for (int k = 1; k < q; ++k) {
        const int pos = va < vb ? k - 1 : q - 1 - k;
        dofs[local++] = renumber[nv + facet * per_edge + pos];
      }
    }
    for (int i = 0; i < per_cell; ++i) dofs[local++] = renumber[nv + per_edge * ne + t * per_cell + i];
  }
  return space;
}

FeSpace FeSpace::discontinuous(std::shared_ptr<const Mesh> mesh, int degree) {
  FeSpace space(SpaceKind::Discontinuous, std::move(mesh), degree);
  space.local_size_ = lagrange_basis(degree).size();
  space.ndofs_ = space.mesh_->num_triangles() * space.local_size_;
  space.dofs_.resize(space.ndofs_);
  for (int i = 0; i < space.ndofs_; ++i) space.dofs_[i] = i;
  return space;
}

FeSpace FeSpace::dirichlet_facet(std::shared_ptr<const Mesh> mesh, int degree) {
  FeSpace space(SpaceKind::DirichletFacet, std::move(mesh), degree);
  const Mesh& m = *space.mesh_;
  space.local_size_ = degree + 1;
  space.facet_offset_.assign(m.num_facets(), -1);
  int next = 0;
  for (int e = 0; e < m.num_facets(); ++e) {
    if (m.facet(e).label != FacetLabel::Dirichlet) continue;
    space.facet_offset_[e] = next;
    for (int k = 0; k <= degree; ++k) space.dofs_.push_back(next++);
  }
  space.ndofs_ = next;
  return space;
}

std::span<const int> FeSpace::element_dofs(int t) const {
  if (kind_ == SpaceKind::DirichletFacet) throw Error("fe space: facet space has no element dofs");
  if (t < 0 || t >= mesh_->num_triangles()) throw Error("fe space: element id out of range");
  return std::span(dofs_).subspan(static_cast<std::size_t>(t) * local_size_, local_size_);
}

std::span<const int> FeSpace::facet_dofs(int e) const {
  if (kind_ != SpaceKind::DirichletFacet) throw Error("fe space: not a facet space");
  if (e < 0 || e >= mesh_->num_facets()) throw Error("fe space: facet id out of range");
  const int offset = facet_offset_[e];
  if (offset < 0) return {};
  return std::span(dofs_).subspan(offset, local_size_);
}

ProductSpace::ProductSpace(std::vector<FeSpace> components) : components_(std::move(components)) {
  if (components_.empty()) throw Error("product space: no components");
  offsets_.push_back(0);
  for (const auto& c : components_) {
    if (c.mesh_ptr() != components_.front().mesh_ptr()) throw Error("product space: components on different meshes");
    offsets_.push_back(offsets_.back() + c.ndofs());
  }
}

ProductSpace make_flux_scalar_space(std::shared_ptr<const Mesh> mesh, int flux_degree, int scalar_degree) {
  return ProductSpace({FeSpace::discontinuous(mesh, flux_degree), FeSpace::discontinuous(mesh, flux_degree),
                       FeSpace::continuous(mesh, scalar_degree)});
}

SpaceTriple build_space_triple(std::shared_ptr<const Mesh> mesh, int p) {
  if (p < 1) throw Error("build_space_triple: polynomial degree p must be >= 1, got " + std::to_string(p));
  SpaceTriple s;
  s.mesh = mesh;
  s.p = p;
  s.trial = make_flux_scalar_space(mesh, p - 1, p);
  s.test = ProductSpace({FeSpace::discontinuous(mesh, p - 1), FeSpace::discontinuous(mesh, p - 1),
                         FeSpace::continuous(mesh, p + 1, true), FeSpace::dirichlet_facet(mesh, p)});
  s.enriched = make_flux_scalar_space(mesh, p, p + 2);
  return s;
}

PointValue evaluate(const FeSpace& space, std::span<const double> coeffs, int element, const Bary& point) {
  if (space.kind() == SpaceKind::DirichletFacet) throw Error("evaluate: use evaluate_facet for facet spaces");
  if (static_cast<int>(coeffs.size()) != space.ndofs()) throw Error("evaluate: coefficient length mismatch");
  if (element < 0 || element >= space.mesh().num_triangles()) throw Error("evaluate: element id out of range");
  const LagrangeBasis& basis = lagrange_basis(space.degree());
  const int n = basis.size();
  std::vector<double> phi(n), dphi(3 * n);
  basis.values(point, phi);
  basis.lambda_derivatives(point, dphi);
  const ElementGeometry geo = element_geometry(space.mesh(), element);
  const auto dofs = space.element_dofs(element);
  PointValue out;
  double dl[3] = {0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    if (dofs[i] < 0) continue;
    const double c = coeffs[dofs[i]];
    out.value += c * phi[i];
    for (int a = 0; a < 3; ++a) dl[a] += c * dphi[3 * i + a];
  }
  out.gradient = geo.gradient(dl);
  return out;
}

double evaluate_facet(const FeSpace& space, std::span<const double> coeffs, int facet, double t) {
  if (space.kind() != SpaceKind::DirichletFacet) throw Error("evaluate_facet: not a facet space");
  if (static_cast<int>(coeffs.size()) != space.ndofs()) throw Error("evaluate_facet: coefficient length mismatch");
  const auto dofs = space.facet_dofs(facet);
  if (dofs.empty()) return 0.0;
  std::vector<double> psi(space.degree() + 1);
  legendre_values(space.degree(), t, psi);
  double value = 0.0;
  for (std::size_t k = 0; k < dofs.size(); ++k) value += coeffs[dofs[k]] * psi[k];
  return value;
}

Eigen::VectorXd interpolate(const FeSpace& space, const ScalarField& f) {
  if (space.kind() == SpaceKind::DirichletFacet) throw Error("interpolate: facet spaces are not nodal");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(space.ndofs());
  const LagrangeBasis& basis = lagrange_basis(space.degree());
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const ElementGeometry geo = element_geometry(space.mesh(), t);
    const auto dofs = space.element_dofs(t);
    for (int i = 0; i < basis.size(); ++i) {
      if (dofs[i] < 0) continue;
      const Vertex x = geo.map(basis.node(i));
      c[dofs[i]] = f(x.x, x.y);
    }
  }
  return c;
}

}  // namespace mrfem
