#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mrfem {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vertex {
  double x = 0.0;
  double y = 0.0;
};

/// Triangle with its newest vertex stored first; the refinement edge is v[1]-v[2].
struct Triangle {
  std::array<int, 3> v{};
  int generation = 0;
};

enum class FacetLabel : std::uint8_t { Interior, Dirichlet, Neumann };

const char* to_string(FacetLabel label);

/// Mesh edge. Endpoints are stored with the lower vertex id first.
struct Facet {
  std::array<int, 2> v{};
  FacetLabel label = FacetLabel::Interior;
};

using EdgeKey = std::pair<int, int>;

inline EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

/// Conforming triangulation with labeled boundary facets.
///
/// Immutable once constructed. Local edge e of a triangle is the edge opposite
/// its local vertex e, so local edge 0 is the refinement edge.
class Mesh {
 public:
  /// Builds edges and adjacency. Every boundary edge must have an entry in
  /// boundary_labels (Dirichlet or Neumann); throws Error otherwise, or when a
  /// triangle is degenerate or clockwise, or the mesh is not conforming.
  Mesh(std::vector<Vertex> vertices, std::vector<Triangle> triangles,
       const std::map<EdgeKey, FacetLabel>& boundary_labels,
       std::vector<int> parent = {}, std::uint64_t parent_id = 0);

  std::span<const Vertex> vertices() const { return vertices_; }
  std::span<const Triangle> triangles() const { return triangles_; }
  std::span<const Facet> facets() const { return facets_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_facets() const { return static_cast<int>(facets_.size()); }

  const Vertex& vertex(int i) const { return vertices_.at(i); }
  const Triangle& triangle(int t) const { return triangles_.at(t); }
  const Facet& facet(int e) const { return facets_.at(e); }

  /// Facet id of local edge e (opposite local vertex e) of triangle t.
  int triangle_facet(int t, int e) const { return tri_facets_[3 * t + e]; }
  /// Incident triangles of a facet; the second entry is -1 on the boundary.
  std::array<int, 2> facet_triangles(int e) const { return facet_tris_[e]; }
  /// Facet id of the edge between two vertices, or -1.
  int find_facet(int a, int b) const;

  double area(int t) const;
  double total_area() const;
  double facet_length(int e) const;

  /// Triangle ids in the mesh this one was refined from (empty for a root mesh).
  std::span<const int> parent() const { return parent_; }
  /// Unique id of this mesh and of the mesh it was refined from (0 if none).
  std::uint64_t id() const { return id_; }
  std::uint64_t parent_id() const { return parent_id_; }

  /// Labels of all boundary facets keyed by sorted endpoint pair.
  std::map<EdgeKey, FacetLabel> boundary_labels() const;

  /// Plain text dump: `v x y`, `t i j k` (newest first), `f i j LABEL`.
  void write(std::ostream& os) const;

 private:
  std::vector<Vertex> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Facet> facets_;
  std::vector<int> tri_facets_;
  std::vector<std::array<int, 2>> facet_tris_;
  std::map<EdgeKey, int> facet_index_;
  std::vector<int> parent_;
  std::uint64_t id_ = 0;
  std::uint64_t parent_id_ = 0;
};

/// The 8-triangle mesh of (-1,1)x(0,1): both unit squares cut along their
/// diagonals, square centers as newest vertices. Neumann on [-1,0]x{0},
/// Dirichlet on the rest of the boundary.
Mesh initial_mesh();

/// Newest vertex bisection of the marked triangles plus conforming closure.
/// Each marked triangle is bisected at least once. The result's parent()
/// refers to triangle ids of the input mesh.
Mesh bisect(const Mesh& mesh, std::span<const int> marked);

/// Two bisection generations of every triangle (quarter-area children).
/// parent() refers to the input mesh.
Mesh refine_uniform(const Mesh& mesh);

}  // namespace mrfem
