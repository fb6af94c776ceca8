#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mrfem/adaptivity.hpp"
#include "mrfem/diagnostics.hpp"
#include "mrfem/problems.hpp"
#include "mrfem/report.hpp"

namespace py = pybind11;
using namespace mrfem;

namespace {

using MeshPtr = std::shared_ptr<Mesh>;

Eigen::MatrixXd vertex_array(const Mesh& m) {
  Eigen::MatrixXd out(m.num_vertices(), 2);
  for (int i = 0; i < m.num_vertices(); ++i) out.row(i) << m.vertex(i).x, m.vertex(i).y;
  return out;
}

Eigen::MatrixXi triangle_array(const Mesh& m) {
  Eigen::MatrixXi out(m.num_triangles(), 3);
  for (int t = 0; t < m.num_triangles(); ++t) {
    for (int a = 0; a < 3; ++a) out(t, a) = m.triangle(t).v[a];
  }
  return out;
}

py::dict level_result(const ProblemData& problem, MeshPtr mesh, int p) {
  Indicators ind;
  const RunRecord r = solve_level(problem, std::move(mesh), p, 0, RunOptions{}, &ind);
  py::dict d;
  d["ndof_x"] = r.ndof_x;
  d["estimator"] = r.estimator;
  d["true_error"] = r.true_error;
  d["effectivity"] = r.effectivity;
  d["indicators"] = ind.local;
  return d;
}

}  // namespace

PYBIND11_MODULE(mrfem, m) {
  m.doc() = "Residual-minimisation FEM for the Poisson problem on (-1,1)x(0,1)";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<SolverError>(m, "SolverError", m.attr("Error"));

  py::class_<Mesh, MeshPtr>(m, "Mesh")
      .def_property_readonly("num_vertices", &Mesh::num_vertices)
      .def_property_readonly("num_triangles", &Mesh::num_triangles)
      .def_property_readonly("num_facets", &Mesh::num_facets)
      .def_property_readonly("vertices", &vertex_array)
      .def_property_readonly("triangles", &triangle_array, "Vertex ids, newest vertex first")
      .def("area", &Mesh::area)
      .def("total_area", &Mesh::total_area)
      .def("write", [](const Mesh& self) {
        std::ostringstream os;
        self.write(os);
        return os.str();
      });

  m.def("initial_mesh", [] { return std::make_shared<Mesh>(initial_mesh()); });
  m.def("refine_uniform", [](const Mesh& mesh) { return std::make_shared<Mesh>(refine_uniform(mesh)); });
  m.def(
      "bisect",
      [](const Mesh& mesh, const std::vector<int>& marked) { return std::make_shared<Mesh>(bisect(mesh, marked)); },
      py::arg("mesh"), py::arg("marked"));

  m.def(
      "space_dimensions",
      [](MeshPtr mesh, int p) {
        const SpaceTriple s = build_space_triple(std::move(mesh), p);
        py::dict d;
        d["trial"] = s.trial.ndofs();
        d["test"] = s.test.ndofs();
        d["enriched"] = s.enriched.ndofs();
        return d;
      },
      py::arg("mesh"), py::arg("p"));

  py::class_<ProblemData>(m, "Problem")
      .def_readonly("name", &ProblemData::name)
      .def("u", [](const ProblemData& d, double x, double y) { return d.exact->u(x, y); })
      .def("grad_u", [](const ProblemData& d, double x, double y) { return d.exact->grad_u(x, y); });
  m.def("singular_problem", &singular_problem);
  m.def("polynomial_problem", &polynomial_problem, py::arg("p"));
  m.def("parse_problem", &parse_problem, py::arg("name"));

  m.def("solve", &level_result, py::arg("problem"), py::arg("mesh"), py::arg("p"),
        "Solve on one mesh; returns estimator, true error and local indicators.");
  m.def(
      "dorfler_mark",
      [](const std::vector<double>& eta, double theta) {
        Indicators ind;
        ind.local = eta;
        return dorfler_mark(ind, theta);
      },
      py::arg("indicators"), py::arg("theta") = 0.6);

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("level", &RunRecord::level)
      .def_readonly("ndof_x", &RunRecord::ndof_x)
      .def_readonly("estimator", &RunRecord::estimator)
      .def_readonly("true_error", &RunRecord::true_error)
      .def_readonly("effectivity", &RunRecord::effectivity)
      .def_readonly("beta", &RunRecord::beta)
      .def_readonly("wall_time", &RunRecord::wall_time);

  m.def(
      "run_adaptive",
      [](const ProblemData& problem, int p, double theta, int max_dofs) {
        return run_adaptive(problem, p, theta, max_dofs);
      },
      py::arg("problem"), py::arg("p"), py::arg("theta") = 0.6, py::arg("max_dofs"),
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "run_uniform",
      [](const ProblemData& problem, int p, int levels, bool beta) {
        RunOptions options;
        options.compute_beta = beta;
        return run_uniform(problem, p, levels, options);
      },
      py::arg("problem"), py::arg("p"), py::arg("levels"), py::arg("beta") = false,
      py::call_guard<py::gil_scoped_release>());
  m.def("loglog_slope", [](const std::vector<double>& x, const std::vector<double>& y) { return loglog_slope(x, y); });
  m.def(
      "trailing_slope",
      [](const std::vector<RunRecord>& rs, int window, bool true_error) { return trailing_slope(rs, window, true_error); },
      py::arg("records"), py::arg("window"), py::arg("true_error") = false);

  m.def(
      "practical_infsup", [](MeshPtr mesh, int p) { return practical_infsup(std::move(mesh), p); }, py::arg("mesh"),
      py::arg("p"));
  m.def(
      "mu_estimate",
      [](MeshPtr mesh, int p, int enrichment, bool refine_proxy) {
        return mu_estimate(std::move(mesh), p, enrichment, refine_proxy);
      },
      py::arg("mesh"), py::arg("p"), py::arg("enrichment") = 2, py::arg("refine_proxy") = true);
  m.def(
      "best_approximation_error",
      [](const ProblemData& problem, MeshPtr mesh, int p) {
        return best_approximation(*problem.exact, build_space_triple(std::move(mesh), p)).error;
      },
      py::arg("problem"), py::arg("mesh"), py::arg("p"));

  m.def(
      "to_csv",
      [](const std::vector<RunRecord>& rs, bool timing) {
        std::ostringstream os;
        write_csv(os, rs, timing);
        return os.str();
      },
      py::arg("records"), py::arg("timing") = true);
  m.def(
      "to_svg",
      [](const std::vector<RunRecord>& rs, int p, const std::string& title) {
        std::ostringstream os;
        write_svg(os, rs, p, title);
        return os.str();
      },
      py::arg("records"), py::arg("p"), py::arg("title") = "");
}
