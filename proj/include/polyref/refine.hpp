#pragma once

// Quality-preserving cell splitting. A marked convex cell is cut in two by a
// chord chosen from one of two strategies (maximum inertia moment or longest
// diagonal), then smoothed: an intersected edge run is split at the midpoint
// of its ancestor-aligned union, unless the new sub-edges would fall below
// c_rho times the local feature size, in which case the cut point collapses
// onto the nearest run endpoint and the chord is re-aimed through it.
// Geometric triangles (three aligned-edge runs, any vertex count) are always
// bisected across their longest run instead.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "polyref/geometry.hpp"
#include "polyref/mesh.hpp"

namespace polyref {

struct UnresolvableCut : MeshError {
  using MeshError::MeshError;
};

enum class CutStrategy { MaximumMoment, LongestDiagonal };

struct RefineConfig {
  CutStrategy strategy = CutStrategy::MaximumMoment;
  double c_rho = 0.0;  // collapse tolerance coefficient, >= 0
};

// Small-feature scale of a cell: min of shortest edge and centroid-to-edge
// distance.
inline double cell_feature_size(const PolyMesh& mesh, Index c, std::vector<Point2>& scratch) {
  mesh.gather_cell_points(c, scratch);
  const PolygonShape s = polygon_shape(scratch);
  return std::min(s.shortest_edge, s.min_edge_dist);
}

inline double cell_feature_size(const PolyMesh& mesh, Index c) {
  std::vector<Point2> scratch;
  return cell_feature_size(mesh, c, scratch);
}

// Edge scale: the larger feature size among the 1-2 alive cells sharing the
// edge. Evaluated against the mesh state at call time.
inline double edge_feature_size(const PolyMesh& mesh, Index e, std::vector<Point2>& scratch) {
  const Edge& ed = mesh.edge(e);
  double rho = 0.0;
  for (Index c : ed.cell)
    if (c != kNone && mesh.cell_alive(c)) rho = std::max(rho, cell_feature_size(mesh, c, scratch));
  return rho;
}

inline double edge_feature_size(const PolyMesh& mesh, Index e) {
  std::vector<Point2> scratch;
  return edge_feature_size(mesh, e, scratch);
}

// One resolved endpoint of a cut chord.
struct CutPoint {
  enum class Kind { Standard, Collapsed };
  Kind kind = Kind::Standard;
  std::vector<Index> run;  // Standard: ring edges whose union midpoint is split
  Index vertex = kNone;    // Collapsed: the cut vertex
  Point2 hit;              // boundary intersection that produced this point
  double collapse_dist = 0.0;  // Collapsed: |hit - vertex|
  double min_piece = std::numeric_limits<double>::infinity();  // Standard: smallest new sub-edge
  double rho_threshold = 0.0;  // c_rho * rho_e at resolution time

  bool standard() const { return kind == Kind::Standard; }
};

struct CutPlan {
  CutPoint a, b;
};

struct RefineStats {
  long long cells_refined = 0;
  long long standard_edge_splits = 0;
  long long rule1_violations = 0;  // sub-edge created at or below c_rho * rho_e
  long long child_vertex_bound_violations = 0;  // child exceeds parent effective count + 1
  long long reaims = 0;
  long long fallback_cuts = 0;
};

// Refinement engine bound to one mesh. Owns the scratch buffers, so reuse one
// instance across a pass.
class Refiner {
 public:
  Refiner(PolyMesh& mesh, RefineConfig config) : mesh_(mesh), config_(config) {}

  const RefineStats& stats() const { return stats_; }
  const RefineConfig& config() const { return config_; }

  // Cut direction for a non-triangular cell, per the configured strategy.
  CutLine compute_cut_line(Index c) {
    mesh_.gather_cell_points(c, pts_);
    const ConvexPolygonView view(pts_);
    return config_.strategy == CutStrategy::MaximumMoment ? max_moment_direction(view)
                                                          : longest_diagonal(view).line;
  }

  // Resolve a cut line into a concrete chord. The two boundary hits are
  // resolved independently (midpoint of the ancestor run, or collapse to the
  // nearest run endpoint); mixed or conflicting outcomes re-aim the line
  // through the collapsed vertex and the centroid, at most twice, before
  // falling back to the best vertex-to-vertex cut.
  CutPlan smoothing_direction(Index c, const CutLine& line) {
    mesh_.gather_cell_points(c, pts_);
    const ConvexPolygonView view(pts_);
    mesh_.aligned_groups(c, groups_);

    const auto hits = line_boundary_intersections(view, line);
    CutPoint cand[2] = {resolve_hit(c, view, hits[0]), resolve_hit(c, view, hits[1])};

    int reaims_left = 2;
    for (;;) {
      const bool a_std = cand[0].standard();
      const bool b_std = cand[1].standard();
      int pinned;
      if (a_std && b_std) return {cand[0], cand[1]};
      if (!a_std && !b_std) {
        if (chord_is_interior(c, cand[0].vertex, cand[1].vertex)) return {cand[0], cand[1]};
        // Both collapsed onto the same or consecutive vertices: keep the one
        // closer to its own intersection, lower vertex id on ties.
        if (cand[0].collapse_dist < cand[1].collapse_dist)
          pinned = 0;
        else if (cand[1].collapse_dist < cand[0].collapse_dist)
          pinned = 1;
        else
          pinned = cand[0].vertex <= cand[1].vertex ? 0 : 1;
      } else {
        pinned = a_std ? 1 : 0;
      }
      if (reaims_left == 0) break;
      --reaims_left;
      stats_.reaims += 1;

      const Index pv = cand[pinned].vertex;
      if (!reaim(c, view, pv, cand[1 - pinned])) break;
      // A standard point on the re-aimed line is terminal: the line already
      // passes through the collapsed vertex.
      if (cand[1 - pinned].standard()) return {cand[pinned], cand[1 - pinned]};
    }
    stats_.fallback_cuts += 1;
    return fallback_plan(c, view);
  }

  // Refine one alive cell. Geometric triangles take the glued longest-side
  // bisection; everything else goes through strategy + smoothing.
  std::pair<Index, Index> refine_cell(Index c) {
    if (!mesh_.cell_alive(c))
      throw MeshError("refine_cell: cell " + std::to_string(c) + " is not alive");
    const int parent_eff = mesh_.effective_vertex_count(c);
    std::pair<Index, Index> children;
    if (parent_eff == 3) {
      children = bisect_triangle(c);
    } else {
      const CutLine line = compute_cut_line(c);
      const CutPlan plan = smoothing_direction(c, line);
      children = execute_plan(c, plan);
    }
    stats_.cells_refined += 1;
    for (Index child : {children.first, children.second})
      if (mesh_.effective_vertex_count(child) > parent_eff + 1)
        stats_.child_vertex_bound_violations += 1;
    return children;
  }

  // Refine every marked cell once, in ascending id order. Later cells see the
  // topology updates (split shared edges) of earlier ones.
  void refine_marked(std::span<const Index> marked) {
    std::vector<Index> order(marked.begin(), marked.end());
    std::sort(order.begin(), order.end());
    if (std::adjacent_find(order.begin(), order.end()) != order.end())
      throw MeshError("refine_marked: duplicate cell id in marked set");
    for (Index c : order) {
      if (!mesh_.cell_alive(c))
        throw MeshError("refine_marked: cell " + std::to_string(c) + " is not alive");
      refine_cell(c);
    }
  }

  // Triangle-only longest-edge bisection with recursive closure: after the
  // marked cells are bisected, any cell left with a hanging node is bisected
  // until the triangulation is conforming again. This is the classical
  // FEM-P1 comparison mode; added cells may exceed marked cells here.
  void refine_marked_conforming(std::span<const Index> marked) {
    std::vector<Index> order(marked.begin(), marked.end());
    std::sort(order.begin(), order.end());
    for (Index c : order) {
      if (!mesh_.cell_alive(c) || mesh_.effective_vertex_count(c) != 3)
        throw MeshError("conforming bisection requires alive triangles");
      bisect_triangle(c);
      stats_.cells_refined += 1;
    }
    for (int sweep = 0; sweep < 1000; ++sweep) {
      std::vector<Index> pending;
      for (std::size_t ci = 0; ci < mesh_.num_cell_slots(); ++ci) {
        const Index c = static_cast<Index>(ci);
        if (mesh_.cell_alive(c) && mesh_.cell(c).size() > 3) pending.push_back(c);
      }
      if (pending.empty()) return;
      for (Index c : pending)
        if (mesh_.cell_alive(c) && mesh_.cell(c).size() > 3) bisect_triangle(c);
    }
    throw UnresolvableCut("conformity closure did not terminate");
  }

 private:
  // Glued longest-side bisection: the longest aligned run is split at the
  // midpoint of its union (an existing hanging node when there is one) and
  // joined to the opposite effective vertex. Applies to any cell with three
  // aligned runs.
  std::pair<Index, Index> bisect_triangle(Index c) {
    mesh_.aligned_groups(c, groups_);
    if (groups_.size() != 3)
      throw UnresolvableCut("longest-side bisection on a non-triangle cell");
    std::size_t gi = 0;
    for (std::size_t k = 1; k < 3; ++k)
      if (groups_[k].length > groups_[gi].length) gi = k;
    const Cell& cc = mesh_.cell(c);
    std::vector<Index> run;
    run.reserve(static_cast<std::size_t>(groups_[gi].len));
    for (int k = 0; k < groups_[gi].len; ++k)
      run.push_back(cc.edge((groups_[gi].start + k) % cc.size()));
    const Index opposite = groups_[(gi + 2) % 3].v_first;
    return mesh_.split_cell(c, SplitLocus::at_edges(std::move(run)),
                            SplitLocus::at_vertex(opposite));
  }

  CutPoint resolve_hit(Index c, const ConvexPolygonView& view, const BoundaryHit& hit) {
    CutPoint p;
    p.hit = hit.point;
    if (hit.vertex >= 0) {
      p.kind = CutPoint::Kind::Collapsed;
      p.vertex = mesh_.cell(c).vert(hit.vertex);
      p.collapse_dist = 0.0;
      return p;
    }
    const Cell& cc = mesh_.cell(c);
    const AlignedGroup& g = group_of(hit.edge, cc.size());
    std::vector<Index> run;
    run.reserve(static_cast<std::size_t>(g.len));
    for (int k = 0; k < g.len; ++k) run.push_back(cc.edge((g.start + k) % cc.size()));

    const GroupSplitPlan split = mesh_.plan_group_split(c, run);
    const double rho_e = edge_feature_size(mesh_, cc.edge(hit.edge), rho_scratch_);
    p.rho_threshold = config_.c_rho * rho_e;
    p.min_piece = split.at_vertex != kNone ? std::numeric_limits<double>::infinity()
                                           : std::min(split.piece_a, split.piece_b);
    if (p.min_piece <= p.rho_threshold) {
      const double da = dist(hit.point, mesh_.point(g.v_first));
      const double db = dist(hit.point, mesh_.point(g.v_last));
      p.kind = CutPoint::Kind::Collapsed;
      if (da < db)
        p.vertex = g.v_first;
      else if (db < da)
        p.vertex = g.v_last;
      else
        p.vertex = std::min(g.v_first, g.v_last);
      p.collapse_dist = std::min(da, db);
    } else {
      p.kind = CutPoint::Kind::Standard;
      p.run = std::move(run);
    }
    return p;
  }

  const AlignedGroup& group_of(int ring_pos, int n) const {
    for (const AlignedGroup& g : groups_) {
      const int rel = (ring_pos - g.start + n) % n;
      if (rel < g.len) return g;
    }
    throw MeshError("ring position outside every aligned group");
  }

  // Re-intersect the line through vertex pv and the centroid with the edges
  // not adjacent to pv, and resolve the single remaining hit into `out`.
  // Returns false when the configuration is too degenerate to re-aim.
  bool reaim(Index c, const ConvexPolygonView& view, Index pv, CutPoint& out) {
    const Cell& cc = mesh_.cell(c);
    const int ppos = cc.find_vert(pv);
    if (ppos < 0) return false;
    const int n = cc.size();
    const Point2 p = mesh_.point(pv);
    const Point2 centroid = view.shape.centroid;
    const Point2 d = centroid - p;
    const double len = norm(d);
    if (len <= 0.0) return false;
    const CutLine line{centroid, {d.x / len, d.y / len}};

    std::vector<BoundaryHit> hits;
    try {
      hits = line_boundary_intersections(view, line);
    } catch (const NoIntersection&) {
      return false;
    }
    const BoundaryHit* keep = nullptr;
    for (const BoundaryHit& h : hits) {
      if (h.vertex == ppos) continue;
      if (h.vertex < 0 && (h.edge == ppos || h.edge == (ppos + n - 1) % n)) continue;
      if (keep != nullptr) return false;
      keep = &h;
    }
    if (keep == nullptr) return false;
    out = resolve_hit(c, view, *keep);
    return true;
  }

  // True when the open chord between two cell vertices lies strictly inside
  // the cell, i.e. it is not an edge and does not run along a straight
  // boundary stretch (hanging nodes included).
  bool chord_is_interior(Index c, Index va, Index vb) const {
    if (va == vb || va == kNone || vb == kNone) return false;
    const Cell& cc = mesh_.cell(c);
    const int n = cc.size();
    const int ia = cc.find_vert(va);
    const int ib = cc.find_vert(vb);
    if (ia < 0 || ib < 0) return false;
    const Point2 pa = mesh_.point(va);
    const Point2 pb = mesh_.point(vb);
    const Point2 d = pb - pa;
    const double len = norm(d);
    const double tol = kVertexSnapRel * std::max(len, mesh_.cell_longest_edge(c));
    for (const auto [from, to] : {std::pair{ia, ib}, std::pair{ib, ia}}) {
      const int steps = (to - from + n) % n;
      if (steps == 1) return false;  // raw edge
      bool straight = true;
      for (int s = 1; s < steps && straight; ++s) {
        const Point2 v = mesh_.point(cc.vert((from + s) % n));
        if (std::abs(cross(d, v - pa)) / len > tol) straight = false;
      }
      if (straight) return false;  // boundary run
    }
    return true;
  }

  // Last resort: the vertex-to-vertex cut over effective vertices that keeps
  // both children largest (max-min area), lexicographically first on ties.
  CutPlan fallback_plan(Index c, const ConvexPolygonView& view) {
    const Cell& cc = mesh_.cell(c);
    const int n = cc.size();
    const std::size_t ng = groups_.size();
    if (ng < 4) throw UnresolvableCut("no vertex-to-vertex fallback on cell " + std::to_string(c));
    double best = -1.0;
    Index bva = kNone, bvb = kNone;
    for (std::size_t i = 0; i + 1 < ng; ++i) {
      for (std::size_t j = i + 1; j < ng; ++j) {
        if (j - i == 1 || (i == 0 && j + 1 == ng)) continue;  // adjacent runs
        const Index va = groups_[i].v_first;
        const Index vb = groups_[j].v_first;
        if (!chord_is_interior(c, va, vb)) continue;
        const double a1 = sub_area(cc, cc.find_vert(va), cc.find_vert(vb), n);
        const double a2 = sub_area(cc, cc.find_vert(vb), cc.find_vert(va), n);
        const double m = std::min(a1, a2);
        if (m > best) {
          best = m;
          bva = va;
          bvb = vb;
        }
      }
    }
    if (bva == kNone) throw UnresolvableCut("no valid fallback chord on cell " + std::to_string(c));
    CutPlan plan;
    plan.a.kind = CutPoint::Kind::Collapsed;
    plan.a.vertex = bva;
    plan.a.hit = mesh_.point(bva);
    plan.b.kind = CutPoint::Kind::Collapsed;
    plan.b.vertex = bvb;
    plan.b.hit = mesh_.point(bvb);
    return plan;
  }

  double sub_area(const Cell& cc, int from, int to, int n) const {
    const Point2 o = mesh_.point(cc.vert(from));
    const int steps = (to - from + n) % n;
    double twice = 0.0;
    for (int s = 1; s < steps; ++s) {
      const Point2 a = mesh_.point(cc.vert((from + s) % n)) - o;
      const Point2 b = mesh_.point(cc.vert((from + s + 1) % n)) - o;
      twice += cross(a, b);
    }
    return 0.5 * twice;
  }

  std::pair<Index, Index> execute_plan(Index c, const CutPlan& plan) {
    SplitLocus la = locus_of(plan.a);
    SplitLocus lb = locus_of(plan.b);
    for (const CutPoint* p : {&plan.a, &plan.b}) {
      if (p->standard() && std::isfinite(p->min_piece)) {
        stats_.standard_edge_splits += 1;
        if (p->min_piece <= p->rho_threshold) stats_.rule1_violations += 1;
      }
    }
    return mesh_.split_cell(c, std::move(la), std::move(lb));
  }

  static SplitLocus locus_of(const CutPoint& p) {
    return p.standard() ? SplitLocus::at_edges(p.run) : SplitLocus::at_vertex(p.vertex);
  }

  PolyMesh& mesh_;
  RefineConfig config_;
  RefineStats stats_;
  std::vector<Point2> pts_;
  std::vector<Point2> rho_scratch_;
  std::vector<AlignedGroup> groups_;
};

}  // namespace polyref
