#include "neumann/medit_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "neumann/errors.hpp"

namespace neumann {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.precision(17);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out << "\nEnd\n";
  out.flush();
  if (!out) throw Error("write to " + path + " failed");
}

// Whitespace-separated tokens with the line each one came from; '#' starts a
// comment that runs to the end of the line.
class Tokens {
 public:
  explicit Tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      std::istringstream ss(line);
      std::string tok;
      while (ss >> tok) {
        items_.push_back({tok, number});
        last_line_ = number;
      }
    }
  }

  bool done() const { return pos_ >= items_.size(); }
  // At the end of input this is the last line that held a token.
  int line() const { return done() ? last_line_ : items_[pos_].line; }

  std::string word() {
    if (done()) throw ParseError("unexpected end of file", line());
    return items_[pos_++].text;
  }

  long integer(const char* what) {
    const int at = line();
    const std::string t = word();
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != t.size()) throw ParseError(std::string("expected integer ") + what + ", got '" + t + "'", at);
    return v;
  }

  double real(const char* what) {
    const int at = line();
    const std::string t = word();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != t.size() || !std::isfinite(v)) {
      throw ParseError(std::string("expected number ") + what + ", got '" + t + "'", at);
    }
    return v;
  }

  // A keyword token: starts with a letter.
  bool at_keyword() const {
    return !done() && std::isalpha(static_cast<unsigned char>(items_[pos_].text[0]));
  }

 private:
  struct Item {
    std::string text;
    int line;
  };
  std::vector<Item> items_;
  std::size_t pos_ = 0;
  int last_line_ = 0;
};

void read_header(Tokens& tk) {
  bool version = false;
  while (tk.at_keyword()) {
    const int at = tk.line();
    const std::string key = tk.word();
    if (key == "MeshVersionFormatted") {
      const long v = tk.integer("format version");
      if (v < 1 || v > 2) throw ParseError("unsupported format version", at);
      version = true;
    } else if (key == "Dimension") {
      if (tk.integer("dimension") != 3) throw ParseError("only dimension 3 is supported", at);
      return;
    } else {
      throw ParseError("unexpected keyword '" + key + "' in header", at);
    }
  }
  if (!version) throw ParseError("missing MeshVersionFormatted", tk.line());
}

// Entries per record of the MEDIT blocks this reader skips.
int skip_width(const std::string& key) {
  if (key == "Edges") return 3;
  if (key == "Corners" || key == "RequiredVertices" || key == "Ridges") return 1;
  if (key == "Quadrilaterals") return 5;
  if (key == "Tetrahedra") return 5;
  if (key == "Normals" || key == "Tangents") return 3;
  return -1;
}

}  // namespace

void write_medit_mesh(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "MeshVersionFormatted 2\nDimension 3\n\nVertices\n" << mesh.num_vertices() << '\n';
  for (const Vec3& p : mesh.vertices()) out << p.x() << ' ' << p.y() << ' ' << p.z() << " 0\n";
  out << "\nTriangles\n" << mesh.num_triangles() << '\n';
  for (const Triangle& t : mesh.triangles()) {
    out << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << " 0\n";
  }
  finish(out, path);
}

SurfaceMesh read_medit_mesh(const std::string& path) {
  Tokens tk(path);
  read_header(tk);
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  bool have_vertices = false, have_triangles = false;
  while (true) {
    if (tk.done()) throw ParseError("missing End keyword", tk.line());
    const int at = tk.line();
    const std::string key = tk.word();
    if (key == "End") break;
    if (key == "Vertices") {
      const long n = tk.integer("vertex count");
      if (n < 0) throw ParseError("negative vertex count", at);
      vertices.resize(n);
      for (long i = 0; i < n; ++i) {
        if (tk.at_keyword() || tk.done()) {
          throw ParseError("Vertices section ends after " + std::to_string(i) + " of " +
                               std::to_string(n) + " entries",
                           tk.line());
        }
        for (int c = 0; c < 3; ++c) vertices[i][c] = tk.real("coordinate");
        tk.integer("vertex reference");
      }
      have_vertices = true;
    } else if (key == "Triangles") {
      const long n = tk.integer("triangle count");
      if (n < 0) throw ParseError("negative triangle count", at);
      triangles.resize(n);
      for (long i = 0; i < n; ++i) {
        if (tk.at_keyword() || tk.done()) {
          throw ParseError("Triangles section ends after " + std::to_string(i) + " of " +
                               std::to_string(n) + " entries",
                           tk.line());
        }
        const int row = tk.line();
        for (int c = 0; c < 3; ++c) {
          const long v = tk.integer("vertex index");
          if (v < 1 || (have_vertices && v > static_cast<long>(vertices.size()))) {
            throw ParseError("vertex index " + std::to_string(v) + " out of range", row);
          }
          triangles[i][c] = static_cast<int>(v - 1);
        }
        tk.integer("triangle reference");
      }
      have_triangles = true;
    } else if (const int width = skip_width(key); width > 0) {
      const long n = tk.integer("entry count");
      for (long i = 0; i < n * width; ++i) tk.real("entry");
    } else {
      throw ParseError("unknown keyword '" + key + "'", at);
    }
  }
  if (!have_vertices || !have_triangles) {
    throw ParseError("mesh needs both Vertices and Triangles", tk.line());
  }
  return SurfaceMesh(std::move(vertices), std::move(triangles));
}

void write_medit_sol(std::span<const double> values, int vertex_count, const std::string& path) {
  if (static_cast<int>(values.size()) != vertex_count) {
    throw StructuralError("solution has " + std::to_string(values.size()) +
                          " values for a mesh with " + std::to_string(vertex_count) + " vertices");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DomainError("solution value " + std::to_string(i) + " is not finite");
    }
  }
  std::ofstream out = open_out(path);
  out << "MeshVersionFormatted 2\nDimension 3\n\nSolAtVertices\n" << values.size() << "\n1 1\n";
  for (double v : values) out << v << '\n';
  finish(out, path);
}

std::vector<double> read_medit_sol(const std::string& path) {
  Tokens tk(path);
  read_header(tk);
  const int at = tk.line();
  if (tk.word() != "SolAtVertices") throw ParseError("expected SolAtVertices", at);
  const long n = tk.integer("value count");
  if (n < 0) throw ParseError("negative value count", at);
  const int type_line = tk.line();
  if (tk.integer("field count") != 1 || tk.integer("field type") != 1) {
    throw ParseError("only one scalar field is supported", type_line);
  }
  std::vector<double> values(n);
  for (long i = 0; i < n; ++i) values[i] = tk.real("value");
  const int end_line = tk.line();
  if (tk.done() || tk.word() != "End") throw ParseError("missing End keyword", end_line);
  return values;
}

}  // namespace neumann
