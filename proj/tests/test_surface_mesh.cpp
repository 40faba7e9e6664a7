#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "neumann/errors.hpp"
#include "neumann/fem_assembly.hpp"
#include "neumann/surface_mesh.hpp"

using namespace neumann;
using std::numbers::pi;

namespace {

// Independent closedness check: count directed edges.
bool every_edge_shared_twice_opposite(const SurfaceMesh& mesh) {
  std::map<std::pair<int, int>, int> directed;
  for (const Triangle& t : mesh.triangles())
    for (int e = 0; e < 3; ++e) directed[{t[e], t[(e + 1) % 3]}]++;
  for (const auto& [edge, count] : directed) {
    if (count != 1) return false;
    auto it = directed.find({edge.second, edge.first});
    if (it == directed.end() || it->second != 1) return false;
  }
  return true;
}

double oracle_area(const SurfaceMesh& mesh) {
  double a = 0.0;
  for (const Triangle& t : mesh.triangles()) {
    a += 0.5 * (mesh.vertex(t[1]) - mesh.vertex(t[0])).cross(mesh.vertex(t[2]) - mesh.vertex(t[0])).norm();
  }
  return a;
}

}  // namespace

TEST_CASE("icosphere combinatorics") {
  CHECK(make_icosphere(0).num_vertices() == 12);
  CHECK(make_icosphere(0).num_triangles() == 20);
  CHECK(make_icosphere(1).num_vertices() == 42);
  CHECK(make_icosphere(1).num_triangles() == 80);
  CHECK_THROWS_AS(make_icosphere(kMaxIcosphereSubdivisions + 1), SizeError);
}

TEST_CASE("icosphere vertices lie on the unit sphere and the mesh is closed") {
  for (int s = 0; s <= 3; ++s) {
    const SurfaceMesh mesh = make_icosphere(s);
    for (const Vec3& p : mesh.vertices()) CHECK(std::abs(p.norm() - 1.0) < 1e-12);
    CHECK(every_edge_shared_twice_opposite(mesh));
    CHECK(mesh.is_closed_orientable());
    CHECK(signed_volume(mesh) > 0.0);
  }
}

TEST_CASE("icosahedron area matches its closed form") {
  // edge of the unit-circumradius icosahedron is 4 / sqrt(10 + 2 sqrt 5)
  const double edge = 4.0 / std::sqrt(10.0 + 2.0 * std::sqrt(5.0));
  const double expected = 20.0 * std::sqrt(3.0) / 4.0 * edge * edge;
  CHECK(total_area(make_icosphere(0)) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(9.5746).epsilon(1e-4));
}

TEST_CASE("sphere area converges at second order") {
  // sum of flat triangle areas against 4 pi
  std::vector<double> err;
  for (int s = 1; s <= 5; ++s) {
    const SurfaceMesh mesh = make_icosphere(s);
    CHECK(total_area(mesh) == doctest::Approx(oracle_area(mesh)).epsilon(1e-12));
    err.push_back(4.0 * pi - total_area(mesh));
  }
  CHECK(std::abs(err[3]) / (4.0 * pi) < 2e-3);  // level 4
  CHECK(std::abs(err[4]) / (4.0 * pi) < 5e-4);  // level 5
  for (int i = 1; i < 5; ++i) CHECK(err[i - 1] / err[i] >= 3.5);
}

TEST_CASE("icosphere is deterministic") {
  const SurfaceMesh a = make_icosphere(3), b = make_icosphere(3);
  CHECK(a.vertices() == b.vertices());
  CHECK(a.triangles() == b.triangles());
  CHECK(a.id() != b.id());
}

TEST_CASE("torus grid counts, geometry errors and area") {
  const SurfaceMesh small = make_torus(2.0, 1.0, 4, 4);
  CHECK(small.num_vertices() == 16);
  CHECK(small.num_triangles() == 32);
  CHECK_THROWS_AS(make_torus(1.0, 1.0, 8, 8), GeometryError);
  CHECK_THROWS_AS(make_torus(2.0, 1.0, 2, 8), SizeError);

  const SurfaceMesh t = make_torus(2.0, 1.0, 64, 64);
  CHECK(every_edge_shared_twice_opposite(t));
  CHECK(signed_volume(t) > 0.0);
  // 4 pi^2 R r under refinement
  CHECK(total_area(t) == doctest::Approx(8.0 * pi * pi).epsilon(5e-3));
  // parameters of vertex (i, j)
  const auto uv = t.surface_parameters(1 * 64 + 3);
  CHECK(std::abs(std::cos(uv[0]) - std::cos(2 * pi * 1 / 64)) + std::abs(std::cos(uv[1]) - std::cos(2 * pi * 3 / 64)) < 1e-12);
}

TEST_CASE("torus area at the published resolution") {
  // |T| = 78.96
  CHECK(std::abs(total_area(make_torus(2.0, 1.0, 256, 256)) / 78.96 - 1.0) < 1e-3);
}

TEST_CASE("cap radius") {
  CHECK(cap_radius_from_area(2.0 * pi) == doctest::Approx(pi / 2));
  CHECK(cap_radius_from_area(0.0) == 0.0);
  CHECK(cap_radius_from_area(4.0 * pi) == doctest::Approx(pi));
  // invert through the area integral 2 pi (1 - cos)
  const double t = cap_radius_from_area(2.0);
  CHECK(2.0 * pi * (1.0 - std::cos(t)) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(t == doctest::Approx(std::acos(1.0 - 1.0 / pi)).epsilon(1e-14));
  CHECK_THROWS_AS(cap_radius_from_area(-1e-3), DomainError);
  CHECK_THROWS_AS(cap_radius_from_area(4.0 * pi + 1e-3), DomainError);
}

TEST_CASE("geodesic cap field") {
  const SurfaceMesh mesh = make_icosphere(5);
  const Eigen::VectorXd g = mass_vector(mesh);
  const std::span<const double> gs(g.data(), g.size());

  const DensityField full = geodesic_cap_field(mesh, Vec3(0, 0, 1), 4.0 * pi - 1e-9);
  for (int i = 0; i < mesh.num_vertices(); ++i)
    if (mesh.vertex(i).z() > -0.999) CHECK(full[i] == 1.0);

  const DensityField half = geodesic_cap_field(mesh, Vec3(0, 0, 1), 2.0 * pi);
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    const double z = mesh.vertex(i).z();
    if (std::abs(z) > 1e-12) CHECK(half[i] == (z > 0 ? 1.0 : 0.0));
  }

  // mass within one ring of elements around the rim
  const double m = 2.0;
  const DensityField cap = geodesic_cap_field(mesh, Vec3(0, 0, 1), m);
  const double rim = 2.0 * pi * std::sin(cap_radius_from_area(m)) * mesh.max_edge_length();
  CHECK(std::abs(cap.mass(gs) - m) < rim);

  // center normalization tolerance
  CHECK_NOTHROW(geodesic_cap_field(mesh, Vec3(0, 0, 1 + 5e-7), m));
  CHECK_THROWS(geodesic_cap_field(mesh, Vec3(0, 0, 1.1), m));
}

TEST_CASE("density field validation") {
  const SurfaceMesh mesh = make_icosphere(1);
  CHECK_THROWS(DensityField(mesh, std::vector<double>(mesh.num_vertices(), 1.5)));
  CHECK_THROWS_AS(DensityField(mesh, std::vector<double>(3, 0.5)), StructuralError);
  const DensityField c = DensityField::constant(mesh, 0.25);
  const Eigen::VectorXd g = mass_vector(mesh);
  CHECK(c.mass({g.data(), static_cast<std::size_t>(g.size())}) == doctest::Approx(0.25 * total_area(mesh)));
}

TEST_CASE("field transfer reproduces linear functions up to chord error") {
  const SurfaceMesh coarse = make_icosphere(3), fine = make_icosphere(5);
  std::vector<double> f(coarse.num_vertices());
  for (int i = 0; i < coarse.num_vertices(); ++i) f[i] = coarse.vertex(i).z() + 0.3 * coarse.vertex(i).x();
  const std::vector<double> g = transfer_vertex_field(coarse, f, fine);
  double worst = 0.0;
  for (int i = 0; i < fine.num_vertices(); ++i) {
    worst = std::max(worst, std::abs(g[i] - fine.vertex(i).z() - 0.3 * fine.vertex(i).x()));
  }
  // the coarse triangles are chords; the sagitta is below h^2 / 8 per unit slope
  const double h = coarse.max_edge_length();
  CHECK(worst < 1.3 * h * h / 8.0 * 1.1);
  CHECK_THROWS_AS(transfer_vertex_field(coarse, std::vector<double>(3, 0.0), fine), StructuralError);
}
