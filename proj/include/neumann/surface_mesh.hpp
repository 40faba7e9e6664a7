#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace neumann {

using Vec3 = Eigen::Vector3d;
using Triangle = std::array<int, 3>;

enum class SurfaceKind { Sphere, Torus, General };

struct TorusParams {
  double major_radius = 2.0;
  double minor_radius = 1.0;
};

/// Compressed sparse row layout of the vertex adjacency graph (diagonal
/// included). `triangle_slots[t][3*i+j]` is the position in the value array of
/// the entry coupling local vertices i and j of triangle t.
struct SparsityPattern {
  std::vector<int> row_start;
  std::vector<int> columns;
  std::vector<std::array<int, 9>> triangle_slots;
};

namespace detail {
struct MeshData {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<double> areas;
  std::vector<Vec3> normals;
  std::vector<std::array<Vec3, 3>> gradients;
  std::vector<int> vt_start;
  std::vector<int> vt_list;
  std::vector<std::array<int, 2>> edges;
  SparsityPattern pattern;
  double min_edge = 0.0;
  double max_edge = 0.0;
  SurfaceKind kind = SurfaceKind::General;
  std::optional<TorusParams> torus;
  std::uint64_t id = 0;
};
}  // namespace detail

/// Immutable triangulated closed surface embedded in R^3.
///
/// Copies share the underlying storage. Each constructed mesh gets a fresh
/// identifier, which fields defined on it carry along so that mismatches can
/// be detected.
class SurfaceMesh {
 public:
  SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
              SurfaceKind kind = SurfaceKind::General,
              std::optional<TorusParams> torus = std::nullopt);

  int num_vertices() const { return static_cast<int>(data_->vertices.size()); }
  int num_triangles() const { return static_cast<int>(data_->triangles.size()); }

  const std::vector<Vec3>& vertices() const { return data_->vertices; }
  const std::vector<Triangle>& triangles() const { return data_->triangles; }
  const Vec3& vertex(int v) const { return data_->vertices[v]; }
  const Triangle& triangle(int t) const { return data_->triangles[t]; }

  double triangle_area(int t) const { return data_->areas[t]; }
  const Vec3& triangle_normal(int t) const { return data_->normals[t]; }
  /// Constant gradients of the three P1 hat functions on the flat triangle.
  const std::array<Vec3, 3>& basis_gradients(int t) const { return data_->gradients[t]; }

  std::span<const int> vertex_triangles(int v) const;
  const SparsityPattern& pattern() const { return data_->pattern; }
  /// Unique undirected edges, each stored with the smaller index first.
  const std::vector<std::array<int, 2>>& edges() const { return data_->edges; }

  double min_edge_length() const { return data_->min_edge; }
  double max_edge_length() const { return data_->max_edge; }

  SurfaceKind kind() const { return data_->kind; }
  const std::optional<TorusParams>& torus() const { return data_->torus; }
  std::uint64_t id() const { return data_->id; }

  /// Every edge is shared by exactly two triangles that traverse it in
  /// opposite directions.
  bool is_closed_orientable() const;

  /// Angular coordinates of a vertex: (colatitude, longitude) on a sphere-like
  /// surface, (u, v) on a torus.
  std::array<double, 2> surface_parameters(int v) const;

 private:
  std::shared_ptr<const detail::MeshData> data_;
};

/// Per-vertex density in [0, 1] tied to one mesh.
class DensityField {
 public:
  DensityField(const SurfaceMesh& mesh, std::vector<double> values);
  static DensityField constant(const SurfaceMesh& mesh, double value);

  std::span<const double> values() const { return values_; }
  double operator[](int i) const { return values_[i]; }
  int size() const { return static_cast<int>(values_.size()); }
  std::uint64_t mesh_id() const { return mesh_id_; }

  /// Discrete mass rho . g for a mass vector of matching length.
  double mass(std::span<const double> g) const;

 private:
  std::vector<double> values_;
  std::uint64_t mesh_id_;
};

inline constexpr int kMaxIcosphereSubdivisions = 8;

/// Regular icosahedron refined `subdivisions` times by edge midpoints, every
/// vertex projected back to the unit sphere.
SurfaceMesh make_icosphere(int subdivisions);

/// Structured periodic torus with `nu` steps around the axis and `nv` around
/// the tube.
SurfaceMesh make_torus(double major_radius, double minor_radius, int nu, int nv);

double total_area(const SurfaceMesh& mesh);

/// Geodesic radius of a spherical cap of area m on the unit sphere.
double cap_radius_from_area(double m);

/// Indicator of the spherical cap of area m centred at `center`.
DensityField geodesic_cap_field(const SurfaceMesh& mesh, const Vec3& center, double m);

/// Sum over triangles of centroid . normal * area / 3 (enclosed volume).
double signed_volume(const SurfaceMesh& mesh);

/// Per-vertex value of the nearest vertex of `from` (brute force search).
std::vector<double> transfer_nearest(const SurfaceMesh& from, std::span<const double> values,
                                     const SurfaceMesh& to);

/// Interpolates a nodal field from `source` onto the vertices of `target`, a
/// mesh of the same surface: each target vertex is located among the triangles
/// around its nearest source vertex and gets the barycentric combination there
/// (clipped to the triangle when it lies slightly outside).
std::vector<double> transfer_vertex_field(const SurfaceMesh& source, std::span<const double> values,
                                          const SurfaceMesh& target);

}  // namespace neumann
