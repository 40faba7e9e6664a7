#pragma once

#include <span>
#include <string>

#include "neumann/surface_mesh.hpp"

namespace neumann {

/// ASCII MEDIT mesh: Vertices (x y z ref) and Triangles (1-based, ref), all
/// refs written as 0.
void write_medit_mesh(const SurfaceMesh& mesh, const std::string& path);

/// Reads the Vertices and Triangles sections and ignores any other keyword
/// block whose size is known (Edges, Corners, Ridges, ...). Throws ParseError
/// with the offending line.
SurfaceMesh read_medit_mesh(const std::string& path);

/// One scalar per vertex in a SolAtVertices block. Rejects non-finite values.
void write_medit_sol(std::span<const double> values, int vertex_count, const std::string& path);

/// Reader for files produced by write_medit_sol.
std::vector<double> read_medit_sol(const std::string& path);

}  // namespace neumann
