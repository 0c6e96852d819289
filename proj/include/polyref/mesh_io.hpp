#pragma once

// Mesh text format v1:
//
//   polymesh 1
//   NV NC
//   x y            (NV lines, decimal literals)
//   k v0 ... vk-1  (NC lines, CCW 0-based vertex indices)
//
// The format carries geometry and topology only; ancestor markers are
// assigned on load. Coordinates are written with 17 significant digits so a
// write/read round trip reproduces every double bit-exactly.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "polyref/mesh.hpp"

namespace polyref {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_mesh(const PolyMesh& mesh, std::ostream& out) {
  std::size_t alive = 0;
  for (std::size_t c = 0; c < mesh.num_cell_slots(); ++c)
    if (mesh.cell(static_cast<Index>(c)).alive()) ++alive;
  out << "polymesh 1\n" << mesh.num_points() << ' ' << alive << '\n';
  for (std::size_t i = 0; i < mesh.num_points(); ++i) {
    const Point2 p = mesh.point(static_cast<Index>(i));
    out << format_double(p.x) << ' ' << format_double(p.y) << '\n';
  }
  for (std::size_t c = 0; c < mesh.num_cell_slots(); ++c) {
    const Cell& cc = mesh.cell(static_cast<Index>(c));
    if (!cc.alive()) continue;
    out << cc.size();
    for (int k = 0; k < cc.size(); ++k) out << ' ' << cc.vert(k);
    out << '\n';
  }
  if (!out) throw IoError("mesh write failed");
}

inline void write_mesh_file(const PolyMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_mesh(mesh, out);
}

inline PolyMesh read_mesh(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "polymesh" || version != 1)
    throw IoError("not a polymesh v1 stream");
  std::size_t nv = 0, nc = 0;
  if (!(in >> nv >> nc)) throw IoError("missing point/cell counts");
  std::vector<Point2> points(nv);
  for (auto& p : points)
    if (!(in >> p.x >> p.y)) throw IoError("malformed point line");
  std::vector<std::vector<Index>> loops(nc);
  for (auto& loop : loops) {
    std::size_t k = 0;
    if (!(in >> k) || k < 3) throw IoError("malformed cell line");
    loop.resize(k);
    for (auto& v : loop)
      if (!(in >> v)) throw IoError("malformed cell line");
  }
  return build_mesh(std::move(points), loops);
}

inline PolyMesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_mesh(in);
}

}  // namespace polyref
