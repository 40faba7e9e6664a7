#include "neumann/surface_mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>

#include "neumann/errors.hpp"

namespace neumann {

namespace {

std::uint64_t next_mesh_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace


SurfaceMesh::SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
                         SurfaceKind kind, std::optional<TorusParams> torus) {
  auto d = std::make_shared<detail::MeshData>();
  d->vertices = std::move(vertices);
  d->triangles = std::move(triangles);
  d->kind = kind;
  d->torus = torus;
  d->id = next_mesh_id();

  const int nv = static_cast<int>(d->vertices.size());
  const int nt = static_cast<int>(d->triangles.size());
  if (nv < 4 || nt < 4) throw SizeError("mesh needs at least 4 vertices and 4 triangles");

  d->areas.resize(nt);
  d->normals.resize(nt);
  d->gradients.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const Triangle& tri = d->triangles[t];
    for (int idx : tri) {
      if (idx < 0 || idx >= nv) {
        throw StructuralError("triangle " + std::to_string(t) + " references vertex " +
                              std::to_string(idx) + " out of range");
      }
    }
    const Vec3& p0 = d->vertices[tri[0]];
    const Vec3& p1 = d->vertices[tri[1]];
    const Vec3& p2 = d->vertices[tri[2]];
    const Vec3 cross = (p1 - p0).cross(p2 - p0);
    const double twice_area = cross.norm();
    if (!(twice_area > 0.0)) {
      throw GeometryError("triangle " + std::to_string(t) + " is degenerate");
    }
    const Vec3 n = cross / twice_area;
    d->areas[t] = 0.5 * twice_area;
    d->normals[t] = n;
    const std::array<const Vec3*, 3> p{&p0, &p1, &p2};
    for (int i = 0; i < 3; ++i) {
      const Vec3 opposite = *p[(i + 2) % 3] - *p[(i + 1) % 3];
      d->gradients[t][i] = n.cross(opposite) / twice_area;
    }
  }

  // vertex -> triangles
  d->vt_start.assign(nv + 1, 0);
  for (const Triangle& tri : d->triangles)
    for (int v : tri) ++d->vt_start[v + 1];
  for (int v = 0; v < nv; ++v) d->vt_start[v + 1] += d->vt_start[v];
  d->vt_list.resize(d->vt_start[nv]);
  {
    std::vector<int> fill(d->vt_start.begin(), d->vt_start.end() - 1);
    for (int t = 0; t < nt; ++t)
      for (int v : d->triangles[t]) d->vt_list[fill[v]++] = t;
  }

  // edges and adjacency
  std::vector<std::vector<int>> neighbours(nv);
  for (const Triangle& tri : d->triangles) {
    for (int i = 0; i < 3; ++i) {
      neighbours[tri[i]].push_back(tri[(i + 1) % 3]);
      neighbours[tri[i]].push_back(tri[(i + 2) % 3]);
    }
  }
  d->min_edge = std::numeric_limits<double>::infinity();
  d->max_edge = 0.0;
  auto& pat = d->pattern;
  pat.row_start.assign(nv + 1, 0);
  for (int v = 0; v < nv; ++v) {
    auto& nb = neighbours[v];
    nb.push_back(v);
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    pat.row_start[v + 1] = pat.row_start[v] + static_cast<int>(nb.size());
    for (int w : nb) {
      if (w > v) {
        d->edges.push_back({v, w});
        const double len = (d->vertices[w] - d->vertices[v]).norm();
        d->min_edge = std::min(d->min_edge, len);
        d->max_edge = std::max(d->max_edge, len);
      }
    }
  }
  pat.columns.reserve(pat.row_start[nv]);
  for (int v = 0; v < nv; ++v)
    pat.columns.insert(pat.columns.end(), neighbours[v].begin(), neighbours[v].end());
  pat.triangle_slots.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const Triangle& tri = d->triangles[t];
    for (int i = 0; i < 3; ++i) {
      const auto row_begin = pat.columns.begin() + pat.row_start[tri[i]];
      const auto row_end = pat.columns.begin() + pat.row_start[tri[i] + 1];
      for (int j = 0; j < 3; ++j) {
        const auto it = std::lower_bound(row_begin, row_end, tri[j]);
        pat.triangle_slots[t][3 * i + j] = static_cast<int>(it - pat.columns.begin());
      }
    }
  }
  data_ = std::move(d);
}

std::span<const int> SurfaceMesh::vertex_triangles(int v) const {
  const int b = data_->vt_start[v];
  const int e = data_->vt_start[v + 1];
  return {data_->vt_list.data() + b, static_cast<std::size_t>(e - b)};
}

bool SurfaceMesh::is_closed_orientable() const {
  // Directed edge (a,b) must appear once and its reverse once.
  std::unordered_map<std::uint64_t, int> balance;
  std::unordered_map<std::uint64_t, int> count;
  for (const Triangle& tri : triangles()) {
    for (int i = 0; i < 3; ++i) {
      const int a = tri[i];
      const int b = tri[(i + 1) % 3];
      const std::uint64_t key = edge_key(a, b);
      count[key] += 1;
      balance[key] += (a < b) ? 1 : -1;
    }
  }
  for (const auto& [key, c] : count) {
    if (c != 2 || balance[key] != 0) return false;
  }
  return true;
}

std::array<double, 2> SurfaceMesh::surface_parameters(int v) const {
  const Vec3& p = vertex(v);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  auto wrap = [](double a) { return a < 0.0 ? a + two_pi : a; };
  if (data_->kind == SurfaceKind::Torus && data_->torus) {
    const double u = wrap(std::atan2(p.z(), p.x()));
    const double radial = std::hypot(p.x(), p.z());
    const double vv = wrap(std::atan2(p.y(), radial - data_->torus->major_radius));
    return {u, vv};
  }
  const double r = p.norm();
  const double theta = std::acos(std::clamp(p.z() / r, -1.0, 1.0));
  const double psi = wrap(std::atan2(p.y(), p.x()));
  return {theta, psi};
}

DensityField::DensityField(const SurfaceMesh& mesh, std::vector<double> values)
    : values_(std::move(values)), mesh_id_(mesh.id()) {
  if (static_cast<int>(values_.size()) != mesh.num_vertices()) {
    throw StructuralError("density has " + std::to_string(values_.size()) +
                          " values for a mesh with " + std::to_string(mesh.num_vertices()) +
                          " vertices");
  }
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("density value outside [0,1]");
  }
}

DensityField DensityField::constant(const SurfaceMesh& mesh, double value) {
  return DensityField(mesh, std::vector<double>(mesh.num_vertices(), value));
}

double DensityField::mass(std::span<const double> g) const {
  if (g.size() != values_.size()) throw StructuralError("mass vector length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += values_[i] * g[i];
  return s;
}

SurfaceMesh make_icosphere(int subdivisions) {
  if (subdivisions < 0 || subdivisions > kMaxIcosphereSubdivisions) {
    throw SizeError("icosphere subdivisions must lie in [0, " +
                    std::to_string(kMaxIcosphereSubdivisions) + "], got " +
                    std::to_string(subdivisions));
  }
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
  };
  for (Vec3& v : verts) v.normalize();
  std::vector<Triangle> tris = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };

  for (int level = 0; level < subdivisions; ++level) {
    std::unordered_map<std::uint64_t, int> midpoint;
    midpoint.reserve(tris.size() * 2);
    auto mid = [&](int a, int b) {
      const std::uint64_t key = edge_key(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int idx = static_cast<int>(verts.size());
      verts.push_back((verts[a] + verts[b]).normalized());
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Triangle> refined;
    refined.reserve(tris.size() * 4);
    for (const Triangle& t : tris) {
      const int ab = mid(t[0], t[1]);
      const int bc = mid(t[1], t[2]);
      const int ca = mid(t[2], t[0]);
      refined.push_back({t[0], ab, ca});
      refined.push_back({t[1], bc, ab});
      refined.push_back({t[2], ca, bc});
      refined.push_back({ab, bc, ca});
    }
    tris = std::move(refined);
  }

  for (Triangle& t : tris) {
    const Vec3 n = (verts[t[1]] - verts[t[0]]).cross(verts[t[2]] - verts[t[0]]);
    if (n.dot(verts[t[0]] + verts[t[1]] + verts[t[2]]) < 0.0) std::swap(t[1], t[2]);
  }
  return SurfaceMesh(std::move(verts), std::move(tris), SurfaceKind::Sphere);
}

SurfaceMesh make_torus(double major_radius, double minor_radius, int nu, int nv) {
  if (!(minor_radius > 0.0) || !(minor_radius < major_radius)) {
    throw GeometryError("torus requires 0 < r < R");
  }
  if (nu < 3 || nv < 3) throw SizeError("torus grid needs nu, nv >= 3");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<Vec3> verts;
  verts.reserve(static_cast<std::size_t>(nu) * nv);
  for (int i = 0; i < nu; ++i) {
    const double u = two_pi * i / nu;
    for (int j = 0; j < nv; ++j) {
      const double v = two_pi * j / nv;
      const double ring = major_radius + minor_radius * std::cos(v);
      verts.emplace_back(ring * std::cos(u), minor_radius * std::sin(v), ring * std::sin(u));
    }
  }
  auto index = [nu, nv](int i, int j) { return ((i + nu) % nu) * nv + (j + nv) % nv; };
  std::vector<Triangle> tris;
  tris.reserve(2 * static_cast<std::size_t>(nu) * nv);
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const int a = index(i, j);
      const int b = index(i + 1, j);
      const int c = index(i + 1, j + 1);
      const int d = index(i, j + 1);
      // v-direction first gives the outward orientation
      tris.push_back({a, d, c});
      tris.push_back({a, c, b});
    }
  }
  return SurfaceMesh(std::move(verts), std::move(tris), SurfaceKind::Torus,
                     TorusParams{major_radius, minor_radius});
}

double total_area(const SurfaceMesh& mesh) {
  double s = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) s += mesh.triangle_area(t);
  return s;
}

double cap_radius_from_area(double m) {
  constexpr double four_pi = 4.0 * std::numbers::pi;
  if (!(m >= 0.0 && m <= four_pi)) throw DomainError("cap area must lie in [0, 4 pi]");
  return std::acos(std::clamp(1.0 - m / (2.0 * std::numbers::pi), -1.0, 1.0));
}

DensityField geodesic_cap_field(const SurfaceMesh& mesh, const Vec3& center, double m) {
  constexpr double four_pi = 4.0 * std::numbers::pi;
  if (!(m > 0.0 && m < four_pi)) throw DomainError("cap area must lie in (0, 4 pi)");
  const double norm = center.norm();
  if (!(std::abs(norm - 1.0) <= 1e-6)) throw DomainError("cap center must be a unit vector");
  const Vec3 c = center / norm;
  const double cos_radius = std::cos(cap_radius_from_area(m));
  std::vector<double> values(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const double cos_angle = mesh.vertex(v).normalized().dot(c);
    values[v] = cos_angle >= cos_radius - 1e-12 ? 1.0 : 0.0;
  }
  return DensityField(mesh, std::move(values));
}

double signed_volume(const SurfaceMesh& mesh) {
  double s = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    const Vec3 centroid = (mesh.vertex(tri[0]) + mesh.vertex(tri[1]) + mesh.vertex(tri[2])) / 3.0;
    s += centroid.dot(mesh.triangle_normal(t)) * mesh.triangle_area(t) / 3.0;
  }
  return s;
}

std::vector<double> transfer_nearest(const SurfaceMesh& from, std::span<const double> values,
                                     const SurfaceMesh& to) {
  if (static_cast<int>(values.size()) != from.num_vertices()) {
    throw StructuralError("transfer: value count does not match source mesh");
  }
  std::vector<double> out(to.num_vertices());
  for (int v = 0; v < to.num_vertices(); ++v) {
    const Vec3& p = to.vertex(v);
    double best = std::numeric_limits<double>::infinity();
    int best_idx = 0;
    for (int w = 0; w < from.num_vertices(); ++w) {
      const double d2 = (from.vertex(w) - p).squaredNorm();
      if (d2 < best) {
        best = d2;
        best_idx = w;
      }
    }
    out[v] = values[best_idx];
  }
  return out;
}

std::vector<double> transfer_vertex_field(const SurfaceMesh& coarse, std::span<const double> values,
                                          const SurfaceMesh& fine) {
  if (static_cast<int>(values.size()) != coarse.num_vertices()) {
    throw StructuralError("field length does not match the source mesh");
  }
  std::vector<double> out(fine.num_vertices());
  for (int v = 0; v < fine.num_vertices(); ++v) {
    const Vec3& p = fine.vertex(v);
    int nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < coarse.num_vertices(); ++c) {
      const double d = (coarse.vertex(c) - p).squaredNorm();
      if (d < best) {
        best = d;
        nearest = c;
      }
    }
    double value = values[nearest];
    double worst_best = -std::numeric_limits<double>::infinity();
    for (int t : coarse.vertex_triangles(nearest)) {
      const Triangle& tri = coarse.triangle(t);
      const Vec3 a = coarse.vertex(tri[0]), b = coarse.vertex(tri[1]), c = coarse.vertex(tri[2]);
      const Vec3 n = (b - a).cross(c - a);
      const double area2 = n.squaredNorm();
      const double l0 = (c - b).cross(p - b).dot(n) / area2;
      const double l1 = (a - c).cross(p - c).dot(n) / area2;
      const double l2 = 1.0 - l0 - l1;
      const double worst = std::min({l0, l1, l2});
      if (worst > worst_best) {
        worst_best = worst;
        const double w0 = std::max(l0, 0.0), w1 = std::max(l1, 0.0), w2 = std::max(l2, 0.0);
        const double s = w0 + w1 + w2;
        value = (w0 * values[tri[0]] + w1 * values[tri[1]] + w2 * values[tri[2]]) / s;
      }
    }
    out[v] = value;
  }
  return out;
}

}  // namespace neumann
