#include "mrfem/mesh.hpp"

#include <atomic>
#include <cmath>
#include <ostream>
#include <set>
#include <string>

namespace mrfem {

namespace {

std::uint64_t next_mesh_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

double signed_area(const Vertex& a, const Vertex& b, const Vertex& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

}  // namespace

const char* to_string(FacetLabel label) {
  switch (label) {
    case FacetLabel::Interior:
      return "INTERIOR";
    case FacetLabel::Dirichlet:
      return "DIRICHLET";
    case FacetLabel::Neumann:
      return "NEUMANN";
  }
  return "UNKNOWN";
}

Mesh::Mesh(std::vector<Vertex> vertices, std::vector<Triangle> triangles,
           const std::map<EdgeKey, FacetLabel>& boundary_labels, std::vector<int> parent,
           std::uint64_t parent_id)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      parent_(std::move(parent)),
      id_(next_mesh_id()),
      parent_id_(parent_id) {
  for (const auto& v : vertices_) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw Error("mesh: non-finite vertex coordinate");
  }
  if (!parent_.empty() && parent_.size() != triangles_.size()) {
    throw Error("mesh: parent map size does not match triangle count");
  }

  const int nv = num_vertices();
  tri_facets_.resize(3 * triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& v = triangles_[t].v;
    for (int i : v) {
      if (i < 0 || i >= nv) throw Error("mesh: triangle references unknown vertex");
    }
    if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2]) throw Error("mesh: repeated triangle vertex");
    if (signed_area(vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]) <= 0.0) {
      throw Error("mesh: triangle " + std::to_string(t) + " is degenerate or clockwise");
    }
    for (int e = 0; e < 3; ++e) {
      const EdgeKey key = edge_key(v[(e + 1) % 3], v[(e + 2) % 3]);
      auto [it, inserted] = facet_index_.try_emplace(key, num_facets());
      if (inserted) {
        facets_.push_back(Facet{{key.first, key.second}, FacetLabel::Interior});
        facet_tris_.push_back({static_cast<int>(t), -1});
      } else {
        auto& adj = facet_tris_[it->second];
        if (adj[1] != -1) throw Error("mesh: facet shared by more than two triangles");
        adj[1] = static_cast<int>(t);
      }
      tri_facets_[3 * t + e] = it->second;
    }
  }

  for (std::size_t e = 0; e < facets_.size(); ++e) {
    if (facet_tris_[e][1] != -1) continue;
    auto it = boundary_labels.find(EdgeKey{facets_[e].v[0], facets_[e].v[1]});
    if (it == boundary_labels.end() || it->second == FacetLabel::Interior) {
      throw Error("mesh: boundary facet (" + std::to_string(facets_[e].v[0]) + "," +
                  std::to_string(facets_[e].v[1]) + ") has no boundary label");
    }
    facets_[e].label = it->second;
  }
}

int Mesh::find_facet(int a, int b) const {
  auto it = facet_index_.find(edge_key(a, b));
  return it == facet_index_.end() ? -1 : it->second;
}

double Mesh::area(int t) const {
  const auto& v = triangles_.at(t).v;
  return signed_area(vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]);
}

double Mesh::total_area() const {
  double sum = 0.0;
  for (int t = 0; t < num_triangles(); ++t) sum += area(t);
  return sum;
}

double Mesh::facet_length(int e) const {
  const auto& f = facets_.at(e);
  const auto& a = vertices_[f.v[0]];
  const auto& b = vertices_[f.v[1]];
  return std::hypot(b.x - a.x, b.y - a.y);
}

std::map<EdgeKey, FacetLabel> Mesh::boundary_labels() const {
  std::map<EdgeKey, FacetLabel> labels;
  for (const auto& f : facets_) {
    if (f.label != FacetLabel::Interior) labels.emplace(EdgeKey{f.v[0], f.v[1]}, f.label);
  }
  return labels;
}

void Mesh::write(std::ostream& os) const {
  const auto old_precision = os.precision(17);
  for (const auto& v : vertices_) os << "v " << v.x << ' ' << v.y << '\n';
  for (const auto& t : triangles_) os << "t " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
  for (const auto& f : facets_) {
    if (f.label != FacetLabel::Interior) {
      os << "f " << f.v[0] << ' ' << f.v[1] << ' ' << to_string(f.label) << '\n';
    }
  }
  os.precision(old_precision);
}

Mesh initial_mesh() {
  std::vector<Vertex> vertices = {
      {-1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0},
      {0.0, 1.0},  {-1.0, 1.0}, {-0.5, 0.5}, {0.5, 0.5},
  };
  // Square centers (6 and 7) are the newest vertex of their four triangles.
  std::vector<Triangle> triangles = {
      {{6, 0, 1}, 0}, {{6, 1, 4}, 0}, {{6, 4, 5}, 0}, {{6, 5, 0}, 0},
      {{7, 1, 2}, 0}, {{7, 2, 3}, 0}, {{7, 3, 4}, 0}, {{7, 4, 1}, 0},
  };
  std::map<EdgeKey, FacetLabel> labels = {
      {edge_key(0, 1), FacetLabel::Neumann},   {edge_key(1, 2), FacetLabel::Dirichlet},
      {edge_key(2, 3), FacetLabel::Dirichlet}, {edge_key(3, 4), FacetLabel::Dirichlet},
      {edge_key(4, 5), FacetLabel::Dirichlet}, {edge_key(5, 0), FacetLabel::Dirichlet},
  };
  return Mesh(std::move(vertices), std::move(triangles), labels);
}

namespace {

class Bisector {
 public:
  Bisector(const Mesh& mesh, std::set<EdgeKey> marked_edges)
      : mesh_(mesh),
        marked_(std::move(marked_edges)),
        vertices_(mesh.vertices().begin(), mesh.vertices().end()),
        labels_(mesh.boundary_labels()) {}

  Mesh run() {
    for (int t = 0; t < mesh_.num_triangles(); ++t) refine(mesh_.triangle(t), t);
    return Mesh(std::move(vertices_), std::move(triangles_), labels_, std::move(parent_), mesh_.id());
  }

 private:
  int midpoint(int a, int b) {
    const EdgeKey key = edge_key(a, b);
    auto it = midpoints_.find(key);
    if (it != midpoints_.end()) return it->second;
    const int m = static_cast<int>(vertices_.size());
    vertices_.push_back({0.5 * (vertices_[a].x + vertices_[b].x), 0.5 * (vertices_[a].y + vertices_[b].y)});
    midpoints_.emplace(key, m);
    if (auto label = labels_.find(key); label != labels_.end()) {
      const FacetLabel l = label->second;
      labels_.erase(label);
      labels_.emplace(edge_key(a, m), l);
      labels_.emplace(edge_key(m, b), l);
    }
    return m;
  }

  void refine(const Triangle& tri, int root) {
    const auto [v0, v1, v2] = tri.v;
    if (!marked_.contains(edge_key(v1, v2))) {
      triangles_.push_back(tri);
      parent_.push_back(root);
      return;
    }
    const int m = midpoint(v1, v2);
    refine(Triangle{{m, v0, v1}, tri.generation + 1}, root);
    refine(Triangle{{m, v2, v0}, tri.generation + 1}, root);
  }

  const Mesh& mesh_;
  std::set<EdgeKey> marked_;
  std::vector<Vertex> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<int> parent_;
  std::map<EdgeKey, FacetLabel> labels_;
  std::map<EdgeKey, int> midpoints_;
};

EdgeKey refinement_edge(const Triangle& t) { return edge_key(t.v[1], t.v[2]); }

}  // namespace

Mesh bisect(const Mesh& mesh, std::span<const int> marked) {
  std::set<EdgeKey> marked_edges;
  std::vector<int> work;
  auto mark = [&](int t) {
    const EdgeKey key = refinement_edge(mesh.triangle(t));
    if (marked_edges.insert(key).second) work.push_back(mesh.find_facet(key.first, key.second));
  };
  for (int t : marked) {
    if (t < 0 || t >= mesh.num_triangles()) throw Error("bisect: marked triangle id out of range");
    mark(t);
  }
  // Closure: a triangle with any marked edge must also have its refinement edge marked.
  while (!work.empty()) {
    const int e = work.back();
    work.pop_back();
    for (int t : mesh.facet_triangles(e)) {
      if (t >= 0) mark(t);
    }
  }
  return Bisector(mesh, std::move(marked_edges)).run();
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<int> all(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) all[t] = t;
  const Mesh once = bisect(mesh, all);
  all.resize(once.num_triangles());
  for (int t = 0; t < once.num_triangles(); ++t) all[t] = t;
  const Mesh twice = bisect(once, all);

  std::vector<int> parent(twice.num_triangles());
  for (int t = 0; t < twice.num_triangles(); ++t) parent[t] = once.parent()[twice.parent()[t]];
  return Mesh(std::vector<Vertex>(twice.vertices().begin(), twice.vertices().end()),
              std::vector<Triangle>(twice.triangles().begin(), twice.triangles().end()),
              twice.boundary_labels(), std::move(parent), mesh.id());
}

}  // namespace mrfem
