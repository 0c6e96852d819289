#pragma once

// Polygonal mesh topology with edge-ancestry markers, two-sided edge
// adjacency and the split-cell primitive. Conformity is polygonal: a cell may
// carry collinear (aligned) edges created by neighbour refinement, and no
// recovery step runs after a split.
//
// Storage is flat and index-based. Refined cells are tombstoned by default so
// the refinement history stays inspectable; the slot-recycling mode trades
// that history for a roughly halved footprint and exists for uniform
// refinement runs with tens of millions of cells. Edge slots are always
// recycled through a free list since edges carry no history beyond their
// ancestor marker.

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "polyref/geometry.hpp"

namespace polyref {

using Index = std::int32_t;
inline constexpr Index kNone = -1;
inline constexpr Index kFreedSlot = -2;

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonManifoldEdge : MeshError {
  using MeshError::MeshError;
};
struct OrientationError : MeshError {
  using MeshError::MeshError;
};
struct NonConvexCell : MeshError {
  using MeshError::MeshError;
};
struct InvalidCut : MeshError {
  using MeshError::MeshError;
};

// Undirected edge. cell[1] == kNone marks a boundary edge; cell[0] ==
// kFreedSlot marks a recycled slot.
struct Edge {
  Index a = kNone;
  Index b = kNone;
  Index ancestor = kNone;
  std::array<Index, 2> cell{kNone, kNone};

  bool freed() const { return cell[0] == kFreedSlot; }
  bool boundary() const { return cell[1] == kNone; }
  Index other_cell(Index c) const { return cell[0] == c ? cell[1] : cell[0]; }
  bool has_endpoint(Index v) const { return a == v || b == v; }
  Index other_endpoint(Index v) const { return a == v ? b : a; }
};

enum class CellState : std::uint8_t { Alive, Refined };

// Cell boundary as an interleaved ring [v0, e0, v1, e1, ...] where edge k
// joins vertex k to vertex k+1 (mod size). The interleaving keeps the struct
// at one heap block per live cell.
struct Cell {
  std::vector<Index> ring;
  Index parent = kNone;
  CellState state = CellState::Alive;

  bool alive() const { return state == CellState::Alive; }
  int size() const { return static_cast<int>(ring.size() / 2); }
  Index vert(int k) const { return ring[2 * static_cast<std::size_t>(k)]; }
  Index edge(int k) const { return ring[2 * static_cast<std::size_t>(k) + 1]; }
  void set_edge(int k, Index e) { ring[2 * static_cast<std::size_t>(k) + 1] = e; }

  int find_edge(Index e) const {
    for (int k = 0; k < size(); ++k)
      if (edge(k) == e) return k;
    return -1;
  }
  int find_vert(Index v) const {
    for (int k = 0; k < size(); ++k)
      if (vert(k) == v) return k;
    return -1;
  }
  // Insert (v, e) so that v becomes vertex k+1 and e the edge leaving it.
  void insert_after(int k, Index v, Index e) {
    ring.insert(ring.begin() + 2 * (static_cast<std::ptrdiff_t>(k) + 1), {v, e});
  }
  void release_ring() {
    std::vector<Index>().swap(ring);
  }
};

// Maximal run of consecutive ring edges descending from one initial-mesh
// edge. Group count equals the effective (geometric) vertex count.
struct AlignedGroup {
  int start = 0;
  int len = 1;
  Index marker = kNone;
  Index v_first = kNone;
  Index v_last = kNone;
  double length = 0.0;
};

// Where a cut point lands on a cell boundary: either an existing vertex or
// the midpoint of a run of consecutive ring edges (split at the midpoint of
// the union segment).
struct SplitLocus {
  Index vertex = kNone;
  std::vector<Index> edges;

  static SplitLocus at_vertex(Index v) { return {v, {}}; }
  static SplitLocus at_edges(std::vector<Index> e) { return {kNone, std::move(e)}; }
};

// Resolution of an edge-run midpoint against the current topology.
struct GroupSplitPlan {
  Point2 midpoint;
  Index at_vertex = kNone;     // existing point the midpoint lands on, if any
  Index member_edge = kNone;   // else the run member that contains it
  double piece_a = 0.0;        // sub-segment lengths produced by the edge split
  double piece_b = 0.0;
};

class PolyMesh {
 public:
  PolyMesh() = default;

  // --- observers -----------------------------------------------------------

  std::size_t num_points() const { return points_.size(); }
  std::size_t num_cell_slots() const { return cells_.size(); }
  std::size_t num_edge_slots() const { return edges_.size(); }
  Index num_alive_cells() const { return n_alive_cells_; }
  Index num_alive_edges() const { return n_alive_edges_; }
  double domain_area() const { return domain_area_; }

  const Point2& point(Index i) const { return points_[static_cast<std::size_t>(i)]; }
  const Cell& cell(Index i) const { return cells_[static_cast<std::size_t>(i)]; }
  const Edge& edge(Index i) const { return edges_[static_cast<std::size_t>(i)]; }
  const std::vector<Point2>& points() const { return points_; }

  bool cell_alive(Index i) const {
    return i >= 0 && i < static_cast<Index>(cells_.size()) && cells_[static_cast<std::size_t>(i)].alive();
  }
  bool edge_alive(Index i) const {
    return i >= 0 && i < static_cast<Index>(edges_.size()) && !edges_[static_cast<std::size_t>(i)].freed();
  }

  double edge_length(Index e) const {
    const Edge& ed = edge(e);
    return dist(point(ed.a), point(ed.b));
  }

  void gather_cell_points(Index c, std::vector<Point2>& out) const {
    const Cell& cc = cell(c);
    out.clear();
    out.reserve(static_cast<std::size_t>(cc.size()));
    for (int k = 0; k < cc.size(); ++k) out.push_back(point(cc.vert(k)));
  }

  double cell_area(Index c) const {
    const Cell& cc = cell(c);
    const int n = cc.size();
    const Point2 o = point(cc.vert(0));
    double twice = 0.0;
    for (int k = 1; k + 1 < n; ++k)
      twice += cross(point(cc.vert(k)) - o, point(cc.vert(k + 1)) - o);
    return 0.5 * twice;
  }

  double total_alive_area() const {
    double a = 0.0;
    for (std::size_t c = 0; c < cells_.size(); ++c)
      if (cells_[c].alive()) a += cell_area(static_cast<Index>(c));
    return a;
  }

  // When enabled (the default), refined cells stay as tombstones referencing
  // their parents. When disabled, a split writes one child over the parent
  // slot; only the alive mesh is retained.
  void set_keep_history(bool keep) { keep_history_ = keep; }
  bool keep_history() const { return keep_history_; }

  // Frozen geometry of the segment each ancestor marker descends from.
  // Available for markers created while tracking was on.
  void set_track_ancestry(bool track) { track_ancestry_ = track; }
  const std::pair<Point2, Point2>* ancestor_segment(Index marker) const {
    if (marker < 0 || marker >= static_cast<Index>(ancestor_segs_.size())) return nullptr;
    return &ancestor_segs_[static_cast<std::size_t>(marker)];
  }

  // --- aligned-edge queries --------------------------------------------

  void aligned_groups(Index c, std::vector<AlignedGroup>& out) const {
    out.clear();
    const Cell& cc = cell(c);
    const int n = cc.size();
    int start = 0;
    for (int k = 0; k < n; ++k) {
      if (edge(cc.edge(k)).ancestor != edge(cc.edge((k + n - 1) % n)).ancestor) {
        start = k;
        break;
      }
    }
    int k = start;
    int consumed = 0;
    while (consumed < n) {
      AlignedGroup g;
      g.start = k;
      g.marker = edge(cc.edge(k)).ancestor;
      g.len = 1;
      while (g.len < n && edge(cc.edge((k + g.len) % n)).ancestor == g.marker) ++g.len;
      g.v_first = cc.vert(k);
      g.v_last = cc.vert((k + g.len) % n);
      g.length = dist(point(g.v_first), point(g.v_last));
      out.push_back(g);
      consumed += g.len;
      k = (k + g.len) % n;
    }
  }

  int effective_vertex_count(Index c) const {
    const Cell& cc = cell(c);
    const int n = cc.size();
    int breaks = 0;
    for (int k = 0; k < n; ++k)
      if (edge(cc.edge(k)).ancestor != edge(cc.edge((k + n - 1) % n)).ancestor) ++breaks;
    return breaks == 0 ? 1 : breaks;
  }

  // Midpoint resolution for a run of consecutive ring edges of cell c. The
  // run midpoint either lands on an existing interior vertex of the run
  // (within the snap tolerance) or strictly inside one member edge.
  GroupSplitPlan plan_group_split(Index c, std::span<const Index> run) const {
    if (run.empty()) throw InvalidCut("empty edge run");
    const Cell& cc = cell(c);
    const int n = cc.size();
    const int pos = cc.find_edge(run[0]);
    if (pos < 0) throw InvalidCut("edge run does not belong to the cell");
    for (std::size_t m = 1; m < run.size(); ++m)
      if (cc.edge((pos + static_cast<int>(m)) % n) != run[m])
        throw InvalidCut("edge run is not consecutive in the cell ring");

    const Index vf = cc.vert(pos);
    const Index vl = cc.vert((pos + static_cast<int>(run.size())) % n);
    GroupSplitPlan plan;
    plan.midpoint = 0.5 * (point(vf) + point(vl));

    const double snap = kVertexSnapRel * cell_longest_edge(c);
    const double half = 0.5 * dist(point(vf), point(vl));
    // Interior run vertices first: the midpoint reuses one when it lands
    // within the snap tolerance (the common case for runs of 2^k siblings).
    double acc = 0.0;
    for (std::size_t m = 0; m < run.size(); ++m) {
      const int k = (pos + static_cast<int>(m)) % n;
      if (m > 0 && std::abs(acc - half) <= snap) {
        plan.at_vertex = cc.vert(k);
        return plan;
      }
      acc += edge_length(cc.edge(k));
    }
    acc = 0.0;
    for (std::size_t m = 0; m < run.size(); ++m) {
      const int k = (pos + static_cast<int>(m)) % n;
      const double len = edge_length(cc.edge(k));
      if (acc + len >= half || m + 1 == run.size()) {
        plan.member_edge = cc.edge(k);
        plan.piece_a = half - acc;
        plan.piece_b = len - plan.piece_a;
        return plan;
      }
      acc += len;
    }
    throw InvalidCut("run midpoint resolution failed");  // unreachable
  }

  double cell_longest_edge(Index c) const {
    const Cell& cc = cell(c);
    double h = 0.0;
    for (int k = 0; k < cc.size(); ++k) h = std::max(h, edge_length(cc.edge(k)));
    return h;
  }

  // --- mutation --------------------------------------------------------

  Index add_point(Point2 p) {
    points_.push_back(p);
    return static_cast<Index>(points_.size() - 1);
  }

  // Split edge e at an interior point. Both adjacent cells have their rings
  // rewritten in place (a neighbour acquires a hanging node); the children
  // inherit the ancestor marker.
  Index split_edge(Index e, Point2 at) {
    Edge old = edge(e);
    const Index nv = add_point(at);
    free_edge(e);
    const Index e1 = alloc_edge(old.a, nv, old.ancestor, old.cell);
    const Index e2 = alloc_edge(nv, old.b, old.ancestor, old.cell);
    for (Index cid : old.cell) {
      if (cid == kNone) continue;
      Cell& cc = cells_[static_cast<std::size_t>(cid)];
      const int k = cc.find_edge(e);
      if (k < 0) throw MeshError("edge adjacency out of sync");
      if (cc.vert(k) == old.a) {
        cc.set_edge(k, e1);
        cc.insert_after(k, nv, e2);
      } else {
        cc.set_edge(k, e2);
        cc.insert_after(k, nv, e1);
      }
    }
    return nv;
  }

  // Split an alive cell by the chord between two boundary loci. Edge-run loci
  // are split at their run midpoint first (reusing an existing vertex when
  // the midpoint lands on one). Returns the two children.
  std::pair<Index, Index> split_cell(Index c, const SplitLocus& a, const SplitLocus& b) {
    if (!cell_alive(c)) throw InvalidCut("cell is not alive");
    const Index va = resolve_locus(c, a);
    const Index vb = resolve_locus(c, b);
    if (va == vb) throw InvalidCut("cut endpoints coincide");

    const Cell& parent = cells_[static_cast<std::size_t>(c)];
    const int n = parent.size();
    const int ia = parent.find_vert(va);
    const int ib = parent.find_vert(vb);
    if (ia < 0 || ib < 0) throw InvalidCut("cut endpoint is not a cell vertex");
    if ((ia + 1) % n == ib || (ib + 1) % n == ia)
      throw InvalidCut("cut endpoints are adjacent in the ring");

    const Index cut_marker = new_marker(point(va), point(vb));
    const Index cut_edge = alloc_edge(va, vb, cut_marker, {kNone, kNone});

    auto build_ring = [&](int from, int to) {
      std::vector<Index> ring;
      const int len = (to - from + n) % n;
      ring.reserve(2 * static_cast<std::size_t>(len + 1));
      for (int s = 0; s < len; ++s) {
        const int k = (from + s) % n;
        ring.push_back(parent.vert(k));
        ring.push_back(parent.edge(k));
      }
      ring.push_back(parent.vert(to));
      ring.push_back(cut_edge);
      return ring;
    };
    std::vector<Index> ring1 = build_ring(ia, ib);
    std::vector<Index> ring2 = build_ring(ib, ia);
    const double parent_area = cell_area(c);
    const double min_child_area = kDegenerateAreaRel * parent_area;
    if (ring_area(ring1) <= min_child_area || ring_area(ring2) <= min_child_area)
      throw InvalidCut("cut produces a degenerate child");

    // append_cell may reallocate the cell table; the parent is re-fetched by
    // index after every append.
    Index c1, c2;
    if (keep_history_) {
      c1 = append_cell(std::move(ring1), c);
      c2 = append_cell(std::move(ring2), c);
      Cell& dead = cells_[static_cast<std::size_t>(c)];
      dead.state = CellState::Refined;
      dead.release_ring();
      n_alive_cells_ -= 1;
    } else {
      c2 = append_cell(std::move(ring2), kNone);
      Cell& slot = cells_[static_cast<std::size_t>(c)];
      slot.ring = std::move(ring1);
      slot.parent = kNone;
      c1 = c;
    }

    edges_[static_cast<std::size_t>(cut_edge)].cell = {c1, c2};
    rebind_ring_edges(c1, c, cut_edge);
    rebind_ring_edges(c2, c, cut_edge);
    return {c1, c2};
  }

  // --- construction ------------------------------------------------------

  friend PolyMesh build_mesh(std::vector<Point2> points,
                             const std::vector<std::vector<Index>>& loops);

  // Full-consistency sweep used by tests; quadratic bits are fine at test
  // scale.
  void validate() const {
    double area = 0.0;
    for (std::size_t ci = 0; ci < cells_.size(); ++ci) {
      const Cell& cc = cells_[ci];
      if (!cc.alive()) continue;
      const int n = cc.size();
      if (n < 3) throw MeshError("alive cell with fewer than 3 vertices");
      for (int k = 0; k < n; ++k) {
        const Edge& ed = edge(cc.edge(k));
        if (ed.freed()) throw MeshError("alive cell references a freed edge");
        const Index u = cc.vert(k);
        const Index w = cc.vert((k + 1) % n);
        if (!((ed.a == u && ed.b == w) || (ed.a == w && ed.b == u)))
          throw MeshError("ring edge endpoints do not match ring vertices");
        if (ed.cell[0] != static_cast<Index>(ci) && ed.cell[1] != static_cast<Index>(ci))
          throw MeshError("ring edge does not list the cell as adjacent");
      }
      area += cell_area(static_cast<Index>(ci));
    }
    for (std::size_t ei = 0; ei < edges_.size(); ++ei) {
      const Edge& ed = edges_[ei];
      if (ed.freed()) continue;
      for (Index cid : ed.cell)
        if (cid != kNone && !cell_alive(cid))
          throw MeshError("edge adjacent to a dead cell");
      if (ed.cell[0] == kNone) throw MeshError("edge with no adjacent cell");
      if (track_ancestry_) {
        const auto* seg = ancestor_segment(ed.ancestor);
        if (seg == nullptr) throw MeshError("edge with unknown ancestor marker");
        const Point2 d = seg->second - seg->first;
        const double len = norm(d);
        for (Index v : {ed.a, ed.b}) {
          const double off = std::abs(cross(d, point(v) - seg->first)) / len;
          const double along = dot(d, point(v) - seg->first) / len;
          if (off > 1e-10 * std::max(1.0, len) || along < -1e-10 || along > len * (1.0 + 1e-10))
            throw MeshError("edge escapes its ancestor segment");
        }
      }
    }
    if (std::abs(area - domain_area_) > 1e-10 * std::max(1.0, domain_area_))
      throw MeshError("alive cells do not cover the domain area");
  }

 private:
  Index resolve_locus(Index c, const SplitLocus& l) {
    if (l.vertex != kNone) {
      if (cell(c).find_vert(l.vertex) < 0) throw InvalidCut("locus vertex not on the cell");
      return l.vertex;
    }
    const GroupSplitPlan plan = plan_group_split(c, l.edges);
    if (plan.at_vertex != kNone) return plan.at_vertex;
    return split_edge(plan.member_edge, plan.midpoint);
  }

  Index append_cell(std::vector<Index> ring, Index parent) {
    Cell cc;
    cc.ring = std::move(ring);
    cc.parent = parent;
    cells_.push_back(std::move(cc));
    n_alive_cells_ += 1;
    return static_cast<Index>(cells_.size() - 1);
  }

  void rebind_ring_edges(Index child, Index parent, Index cut_edge) {
    const Cell& cc = cell(child);
    for (int k = 0; k < cc.size(); ++k) {
      const Index e = cc.edge(k);
      if (e == cut_edge) continue;
      Edge& ed = edges_[static_cast<std::size_t>(e)];
      if (ed.cell[0] == parent)
        ed.cell[0] = child;
      else if (ed.cell[1] == parent)
        ed.cell[1] = child;
    }
  }

  double ring_area(const std::vector<Index>& ring) const {
    const std::size_t n = ring.size() / 2;
    const Point2 o = point(ring[0]);
    double twice = 0.0;
    for (std::size_t k = 1; k + 1 < n; ++k)
      twice += cross(point(ring[2 * k]) - o, point(ring[2 * (k + 1)]) - o);
    return 0.5 * twice;
  }

  Index alloc_edge(Index a, Index b, Index ancestor, std::array<Index, 2> cells) {
    if (!free_edges_.empty()) {
      const Index e = free_edges_.back();
      free_edges_.pop_back();
      edges_[static_cast<std::size_t>(e)] = {a, b, ancestor, cells};
      n_alive_edges_ += 1;
      return e;
    }
    edges_.push_back({a, b, ancestor, cells});
    n_alive_edges_ += 1;
    return static_cast<Index>(edges_.size() - 1);
  }

  void free_edge(Index e) {
    Edge& ed = edges_[static_cast<std::size_t>(e)];
    ed.cell = {kFreedSlot, kNone};
    ed.a = ed.b = ed.ancestor = kNone;
    free_edges_.push_back(e);
    n_alive_edges_ -= 1;
  }

  Index new_marker(Point2 a, Point2 b) {
    const Index m = next_marker_++;
    if (track_ancestry_) {
      ancestor_segs_.resize(static_cast<std::size_t>(next_marker_));
      ancestor_segs_[static_cast<std::size_t>(m)] = {a, b};
    }
    return m;
  }

  std::vector<Point2> points_;
  std::vector<Cell> cells_;
  std::vector<Edge> edges_;
  std::vector<Index> free_edges_;
  std::vector<std::pair<Point2, Point2>> ancestor_segs_;
  Index n_alive_cells_ = 0;
  Index n_alive_edges_ = 0;
  Index next_marker_ = 0;
  double domain_area_ = 0.0;
  bool keep_history_ = true;
  bool track_ancestry_ = true;
};

// Build a mesh from a point set and CCW convex vertex loops. Shared edges
// must be described by identical endpoint pairs. Every initial edge receives
// a fresh ancestor marker.
inline PolyMesh build_mesh(std::vector<Point2> points,
                           const std::vector<std::vector<Index>>& loops) {
  PolyMesh m;
  m.points_ = std::move(points);

  std::unordered_map<std::uint64_t, Index> edge_of;
  edge_of.reserve(loops.size() * 4);
  std::vector<Point2> scratch;

  for (std::size_t li = 0; li < loops.size(); ++li) {
    const std::vector<Index>& loop = loops[li];
    if (loop.size() < 3) throw MeshError("cell loop with fewer than 3 vertices");
    scratch.clear();
    for (Index v : loop) {
      if (v < 0 || v >= static_cast<Index>(m.points_.size()))
        throw MeshError("cell loop references a missing point");
      scratch.push_back(m.points_[static_cast<std::size_t>(v)]);
    }
    switch (check_convex_loop(scratch)) {
      case LoopCheck::Ok:
        break;
      case LoopCheck::NotCcw:
        throw OrientationError("cell " + std::to_string(li) + " is not CCW");
      case LoopCheck::NotConvex:
        throw NonConvexCell("cell " + std::to_string(li) + " is not convex");
      default:
        throw MeshError("cell " + std::to_string(li) + " has a degenerate loop");
    }

    const Index cid = static_cast<Index>(m.cells_.size());
    Cell cc;
    cc.ring.reserve(2 * loop.size());
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const Index u = loop[k];
      const Index w = loop[(k + 1) % loop.size()];
      const std::uint64_t key = (static_cast<std::uint64_t>(std::min(u, w)) << 32) |
                                static_cast<std::uint64_t>(std::max(u, w));
      Index e;
      auto it = edge_of.find(key);
      if (it == edge_of.end()) {
        e = m.alloc_edge(u, w, m.new_marker(m.points_[static_cast<std::size_t>(u)],
                                            m.points_[static_cast<std::size_t>(w)]),
                         {cid, kNone});
        edge_of.emplace(key, e);
      } else {
        e = it->second;
        Edge& ed = m.edges_[static_cast<std::size_t>(e)];
        if (ed.cell[1] != kNone)
          throw NonManifoldEdge("edge shared by more than two cells");
        ed.cell[1] = cid;
      }
      cc.ring.push_back(u);
      cc.ring.push_back(e);
    }
    m.cells_.push_back(std::move(cc));
    m.n_alive_cells_ += 1;
  }
  m.domain_area_ = m.total_alive_area();
  return m;
}

}  // namespace polyref
