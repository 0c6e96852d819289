#pragma once

// Per-element quality parameters and whole-mesh statistics, emitted once per
// refinement iteration.

#include <cmath>
#include <vector>

#include "polyref/geometry.hpp"
#include "polyref/mesh.hpp"

namespace polyref {

// Aspect-ratio style parameters of one convex cell. All are >= 1 for a valid
// cell; ar_edge compares cyclically consecutive loop edges, so hanging nodes
// show up as short-edge spikes.
struct ElementQuality {
  double ar_rr = 1.0;    // max vertex distance / min edge distance
  double ar_hr = 1.0;    // longest edge / min edge distance
  double ar_hh = 1.0;    // longest edge / shortest edge
  double ar_edge = 1.0;  // worst consecutive edge-length ratio
};

inline ElementQuality element_quality(const PolyMesh& mesh, Index c,
                                      std::vector<Point2>& scratch) {
  mesh.gather_cell_points(c, scratch);
  const PolygonShape s = polygon_shape(scratch);
  ElementQuality q;
  q.ar_rr = s.max_vertex_dist / s.min_edge_dist;
  q.ar_hr = s.longest_edge / s.min_edge_dist;
  q.ar_hh = s.longest_edge / s.shortest_edge;
  q.ar_edge = 1.0;
  const std::size_t n = scratch.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double la = dist(scratch[k], scratch[(k + 1) % n]);
    const double lb = dist(scratch[(k + 1) % n], scratch[(k + 2) % n]);
    q.ar_edge = std::max(q.ar_edge, std::max(la, lb) / std::min(la, lb));
  }
  return q;
}

inline ElementQuality element_quality(const PolyMesh& mesh, Index c) {
  std::vector<Point2> scratch;
  return element_quality(mesh, c, scratch);
}

struct StatSummary {
  double max = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // population convention
};

struct MeshStats {
  long long n_cells = 0;
  long long n_points = 0;
  long long n_tri = 0;   // cells with exactly 3 loop vertices
  long long n_quad = 0;  // exactly 4 loop vertices
  double e_ratio = 0.0;  // points per cell
  double r_tri = 0.0;
  double r_quad = 0.0;
  StatSummary ar_rr, ar_edge, ar_hr, ar_hh;
};

namespace detail {
class RunningStat {
 public:
  void add(double x) {
    n_ += 1;
    sum_ += x;
    sumsq_ += x * x;
    max_ = std::max(max_, x);
  }
  StatSummary summary() const {
    StatSummary s;
    if (n_ == 0) return s;
    s.max = max_;
    s.mean = sum_ / static_cast<double>(n_);
    s.stddev = std::sqrt(std::max(0.0, sumsq_ / static_cast<double>(n_) - s.mean * s.mean));
    return s;
  }

 private:
  long long n_ = 0;
  double sum_ = 0.0, sumsq_ = 0.0;
  double max_ = 0.0;
};
}  // namespace detail

inline MeshStats mesh_stats(const PolyMesh& mesh) {
  MeshStats out;
  detail::RunningStat rr, edge, hr, hh;
  std::vector<Point2> scratch;
  for (std::size_t ci = 0; ci < mesh.num_cell_slots(); ++ci) {
    const Index c = static_cast<Index>(ci);
    if (!mesh.cell(c).alive()) continue;
    out.n_cells += 1;
    const int nv = mesh.cell(c).size();
    if (nv == 3) out.n_tri += 1;
    if (nv == 4) out.n_quad += 1;
    const ElementQuality q = element_quality(mesh, c, scratch);
    rr.add(q.ar_rr);
    edge.add(q.ar_edge);
    hr.add(q.ar_hr);
    hh.add(q.ar_hh);
  }
  out.n_points = static_cast<long long>(mesh.num_points());
  if (out.n_cells > 0) {
    out.e_ratio = static_cast<double>(out.n_points) / static_cast<double>(out.n_cells);
    out.r_tri = static_cast<double>(out.n_tri) / static_cast<double>(out.n_cells);
    out.r_quad = static_cast<double>(out.n_quad) / static_cast<double>(out.n_cells);
  }
  out.ar_rr = rr.summary();
  out.ar_edge = edge.summary();
  out.ar_hr = hr.summary();
  out.ar_hh = hh.summary();
  return out;
}

}  // namespace polyref
