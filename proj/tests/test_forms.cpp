#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "mrfem/forms.hpp"
#include "mrfem/problems.hpp"
#include "mrfem/quadrature.hpp"
#include "oracles.hpp"

using namespace mrfem;

namespace {

// Reference triangle; edge (0,1) on y = 0 is Dirichlet and has length 1.
std::shared_ptr<const Mesh> reference_mesh() {
  return std::make_shared<const Mesh>(Mesh(
      {{0, 0}, {1, 0}, {0, 1}}, {{{2, 0, 1}, 0}},
      {{{0, 1}, FacetLabel::Dirichlet}, {{1, 2}, FacetLabel::Neumann}, {{0, 2}, FacetLabel::Neumann}}));
}

std::shared_ptr<const Mesh> mesh_at(int levels) {
  Mesh m = initial_mesh();
  for (int i = 0; i < levels; ++i) m = refine_uniform(m);
  return std::make_shared<const Mesh>(std::move(m));
}

// Local dof of vertex id `v` in element t of a continuous space.
int vertex_dof(const FeSpace& s, int t, int v) {
  const auto& tri = s.mesh().triangle(t).v;
  for (int a = 0; a < 3; ++a) {
    if (tri[a] == v) return s.element_dofs(t)[a];
  }
  return -1;
}

// Nodal transfer of a (q_x, q_y, w) function into a richer space on the same
// or a refined mesh.
Eigen::VectorXd embed(const ProductSpace& from, const Eigen::VectorXd& c, const ProductSpace& to) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(to.ndofs());
  const Mesh& fine = to.mesh();
  const bool same = &from.mesh() == &fine;
  for (int k = 0; k < 3; ++k) {
    const FeSpace& src = from.component(k);
    const FeSpace& dst = to.component(k);
    const LagrangeBasis& basis = lagrange_basis(dst.degree());
    const auto part = c.segment(from.offset(k), src.ndofs());
    std::vector<double> cv(part.data(), part.data() + part.size());
    for (int t = 0; t < fine.num_triangles(); ++t) {
      const int coarse = same ? t : fine.parent()[t];
      const ElementGeometry gf = element_geometry(fine, t);
      const ElementGeometry gc = element_geometry(from.mesh(), coarse);
      for (int i = 0; i < basis.size(); ++i) {
        const int d = dst.element_dofs(t)[i];
        if (d < 0) continue;
        const Vertex x = gf.map(basis.node(i));
        out[to.offset(k) + d] = evaluate(src, cv, coarse, gc.barycentric(x.x, x.y)).value;
      }
    }
  }
  return out;
}

Eigen::VectorXd random_vector(int n, unsigned seed) {
  std::srand(seed);
  return Eigen::VectorXd::Random(n);
}

// ||q||^2 + ||w||^2_{H1} by plain element quadrature.
double x_norm_squared(const ProductSpace& s, const Eigen::VectorXd& c) {
  const QuadRule rule = triangle_rule(2 * s.component(2).degree() + 2);
  std::array<std::vector<double>, 3> parts;
  for (int k = 0; k < 3; ++k) {
    const auto seg = c.segment(s.offset(k), s.component(k).ndofs());
    parts[k].assign(seg.data(), seg.data() + seg.size());
  }
  double sum = 0.0;
  for (int t = 0; t < s.mesh().num_triangles(); ++t) {
    const double jac = 2.0 * s.mesh().area(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Bary& l = rule.points[q];
      const double qx = evaluate(s.component(0), parts[0], t, l).value;
      const double qy = evaluate(s.component(1), parts[1], t, l).value;
      const PointValue w = evaluate(s.component(2), parts[2], t, l);
      sum += rule.weights[q] * jac *
             (qx * qx + qy * qy + w.value * w.value + w.gradient[0] * w.gradient[0] + w.gradient[1] * w.gradient[1]);
    }
  }
  return sum;
}

}  // namespace

TEST(Forms, ReferenceTriangleGradientEntry) {
  const SpaceTriple s = build_space_triple(reference_mesh(), 1);
  const SparseMatrix c = assemble_g(s.trial, s.test);
  // phi = 1 - x - y is the basis function of vertex 0 at (0,0); v1 = (1, 0).
  const int col = s.trial.offset(2) + vertex_dof(s.trial.component(2), 0, 0);
  const int row = s.test.offset(0) + s.test.component(0).element_dofs(0)[0];
  EXPECT_NEAR(c.coeff(row, col), 0.5, 1e-12);
  // Same with v1 = (0, 1).
  const int row_y = s.test.offset(1) + s.test.component(1).element_dofs(0)[0];
  EXPECT_NEAR(c.coeff(row_y, col), 0.5, 1e-12);
}

TEST(Forms, DirichletFacetBlock) {
  const SpaceTriple s = build_space_triple(reference_mesh(), 1);
  const SparseMatrix c = assemble_g(s.trial, s.test);
  const int e = s.mesh->find_facet(0, 1);
  const auto rows = s.test.component(3).facet_dofs(e);
  ASSERT_EQ(rows.size(), 2u);
  Eigen::Matrix2d legendre;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      legendre(i, j) = c.coeff(s.test.offset(3) + rows[i], s.trial.offset(2) + vertex_dof(s.trial.component(2), 0, j));
    }
  }
  // P0 = n0 + n1, P1 = -n0 + n1 in terms of the nodal facet basis (n0 at vertex 0).
  Eigen::Matrix2d t;
  t << 1, 1, -1, 1;
  const Eigen::Matrix2d nodal = t.inverse() * legendre;
  Eigen::Matrix2d expected;
  expected << 1.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3;
  EXPECT_LE((nodal - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Forms, ZeroTrialGivesZero) {
  const SpaceTriple s = build_space_triple(mesh_at(1), 2);
  const SparseMatrix c = assemble_g(s.trial, s.test);
  EXPECT_EQ((c * Eigen::VectorXd::Zero(s.trial.ndofs())).norm(), 0.0);
}

TEST(Forms, GramReferenceEntryAndSymmetry) {
  const SpaceTriple s = build_space_triple(reference_mesh(), 1);
  const SparseMatrix g = assemble_x_gram(s.trial);
  const int d = s.trial.offset(2) + vertex_dof(s.trial.component(2), 0, 0);
  EXPECT_NEAR(g.coeff(d, d), 13.0 / 12.0, 1e-12);

  for (int p = 1; p <= 3; ++p) {
    const SpaceTriple t = build_space_triple(mesh_at(0), p);
    for (const ProductSpace* space : {&t.trial, &t.enriched}) {
      const Eigen::MatrixXd m = Eigen::MatrixXd(assemble_x_gram(*space));
      EXPECT_LE((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-15 * m.cwiseAbs().maxCoeff());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
      EXPECT_GT(es.eigenvalues()[0], 0.0);
    }
  }
}

TEST(Forms, GramOfConstantIsArea) {
  const auto mesh = mesh_at(2);
  for (int p = 1; p <= 3; ++p) {
    const ProductSpace x = make_flux_scalar_space(mesh, p - 1, p);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(x.ndofs());
    c.segment(x.offset(2), x.component(2).ndofs()).setOnes();
    EXPECT_NEAR(c.dot(assemble_x_gram(x) * c), 2.0, 1e-12);
  }
}

TEST(Forms, GramMatchesIndependentQuadrature) {
  const auto mesh = mesh_at(1);
  for (int p = 1; p <= 3; ++p) {
    const ProductSpace x = make_flux_scalar_space(mesh, p, p + 2);
    const Eigen::VectorXd c = random_vector(x.ndofs(), 5 + p);
    const double form = c.dot(assemble_x_gram(x) * c);
    EXPECT_NEAR(form, x_norm_squared(x, c), 1e-12 * form);
  }
}

TEST(Forms, EnrichedAgreesWithTrialUnderEmbedding) {
  for (int levels : {0, 1}) {
    const auto mesh = mesh_at(levels);
    for (int p = 1; p <= 3; ++p) {
      const SpaceTriple s = build_space_triple(mesh, p);
      const Eigen::VectorXd c = random_vector(s.trial.ndofs(), 17 + p);
      const Eigen::VectorXd ch = embed(s.trial, c, s.enriched);
      const Eigen::VectorXd a = assemble_g(s.trial, s.test) * c;
      const Eigen::VectorXd b = assemble_g(s.enriched, s.test) * ch;
      EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(Forms, CrossMeshAssemblyMatchesEmbedding) {
  const auto coarse = mesh_at(1);
  const auto fine = std::make_shared<const Mesh>(refine_uniform(*coarse));
  for (int p = 1; p <= 2; ++p) {
    const SpaceTriple s = build_space_triple(coarse, p);
    const ProductSpace proxy = make_flux_scalar_space(fine, p + 1, p + 3);
    const Eigen::VectorXd c = random_vector(s.enriched.ndofs(), 23 + p);
    const Eigen::VectorXd cf = embed(s.enriched, c, proxy);
    const Eigen::VectorXd a = assemble_g(s.enriched, s.test) * c;
    const Eigen::VectorXd b = assemble_g(proxy, s.test) * cf;
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-11 * std::max(1.0, a.cwiseAbs().maxCoeff()));
    // Gram forms agree as well.
    EXPECT_NEAR(c.dot(assemble_x_gram(s.enriched) * c), cf.dot(assemble_x_gram(proxy) * cf), 1e-10);
  }
}

TEST(Forms, CrossMeshRejectsUnrelatedMeshes) {
  const SpaceTriple a = build_space_triple(mesh_at(0), 1);
  const SpaceTriple b = build_space_triple(mesh_at(0), 1);
  EXPECT_THROW(assemble_g(a.trial, b.test), Error);
}

TEST(Forms, DiffusionHookScalesGradientTerm) {
  const SpaceTriple s = build_space_triple(mesh_at(1), 2);
  const SparseMatrix c = assemble_g(s.trial, s.test);
  const SparseMatrix c2 = assemble_g(s.trial, s.test, [](int) { return std::array<double, 4>{2, 0, 0, 2}; });
  const Eigen::MatrixXd d = Eigen::MatrixXd(c2 - c);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(c);
  const int nv1 = s.test.offset(2);
  const int w0 = s.trial.offset(2);
  // Only the v1 x grad w block changes, and it doubles.
  EXPECT_LE(d.bottomRows(d.rows() - nv1).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE(d.leftCols(w0).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((d.topRightCorner(nv1, d.cols() - w0) - dense.topRightCorner(nv1, d.cols() - w0)).cwiseAbs().maxCoeff(),
            1e-14);
}

TEST(Forms, LoadConstantDirichletData) {
  const SpaceTriple s = build_space_triple(mesh_at(0), 1);
  ProblemData data;
  data.h_dirichlet = [](double, double) { return 1.0; };
  const Eigen::VectorXd f = assemble_load(s.test, data);
  const int e = s.mesh->find_facet(1, 2);  // (0,0)-(1,0), length 1
  ASSERT_EQ(s.mesh->facet(e).label, FacetLabel::Dirichlet);
  const auto d = s.test.component(3).facet_dofs(e);
  EXPECT_NEAR(f[s.test.offset(3) + d[0]], 1.0, 1e-14);
  EXPECT_NEAR(f[s.test.offset(3) + d[1]], 0.0, 1e-14);
  EXPECT_EQ(f.head(s.test.offset(3)).norm(), 0.0);
}

TEST(Forms, LoadSingularProblem) {
  const SpaceTriple s = build_space_triple(mesh_at(0), 2);
  const ProblemData data = singular_problem();
  const Eigen::VectorXd f = assemble_load(s.test, data);
  EXPECT_EQ(f.head(s.test.offset(3)).norm(), 0.0);
  // Facet from (-1,0) to (-1,1): vertices 0 and 5.
  const int e = s.mesh->find_facet(0, 5);
  const auto d = s.test.component(3).facet_dofs(e);
  ASSERT_EQ(d.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    const double exact = oracle::integrate_1d([&](double t) {
      const double leg = k == 0 ? 1.0 : (k == 1 ? 2 * t - 1 : 0.5 * (3 * (2 * t - 1) * (2 * t - 1) - 1));
      return data.h_dirichlet(-1.0, t) * leg;
    });
    EXPECT_NEAR(f[s.test.offset(3) + d[k]], exact, 1e-10) << "Legendre mode " << k;
  }
}

TEST(Forms, PolynomialProblemResidualVanishes) {
  for (int levels : {0, 1}) {
    for (int p = 1; p <= 3; ++p) {
      const SpaceTriple s = build_space_triple(mesh_at(levels), p);
      const ProblemData data = polynomial_problem(p);
      const Eigen::VectorXd u = interpolate_exact(*data.exact, s.trial);
      const Eigen::VectorXd r = assemble_load(s.test, data) - assemble_g(s.trial, s.test) * u;
      EXPECT_LE(r.cwiseAbs().maxCoeff(), 1e-10) << "p = " << p;
    }
  }
}
