#pragma once

// Planar primitives for convex polygonal cells: areas, centroids, second
// moments, diagonals and cut-line/boundary intersections. Everything here is
// pure and allocation-light; tolerances are relative so behaviour is
// scale-invariant.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyref {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::sqrt(p.x * p.x + p.y * p.y); }
inline double dist(Point2 a, Point2 b) { return norm(a - b); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Relative tolerances shared across the library.
inline constexpr double kDegenerateAreaRel = 1e-14;  // vs bounding-box area
inline constexpr double kVertexSnapRel = 1e-9;       // vs longest edge
inline constexpr double kAngleSlack = 1e-9;          // radians of convexity slack

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegeneratePolygon : GeometryError {
  using GeometryError::GeometryError;
};
struct NoIntersection : GeometryError {
  using GeometryError::GeometryError;
};

struct AreaCentroid {
  double area = 0.0;
  Point2 centroid;
};

// Shoelace area and area centroid of a CCW loop. Coordinates are shifted to
// the first vertex before accumulating so the result is stable for loops far
// from the origin.
inline AreaCentroid polygon_area_centroid(std::span<const Point2> verts) {
  const std::size_t n = verts.size();
  if (n < 3) throw DegeneratePolygon("polygon needs at least 3 vertices");
  double lox = verts[0].x, hix = verts[0].x, loy = verts[0].y, hiy = verts[0].y;
  for (const Point2& p : verts) {
    if (!is_finite(p)) throw DegeneratePolygon("non-finite vertex");
    lox = std::min(lox, p.x);
    hix = std::max(hix, p.x);
    loy = std::min(loy, p.y);
    hiy = std::max(hiy, p.y);
  }
  const Point2 origin = verts[0];
  double twice_area = 0.0;
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = verts[i] - origin;
    const Point2 b = verts[(i + 1) % n] - origin;
    const double w = cross(a, b);
    twice_area += w;
    cx += w * (a.x + b.x);
    cy += w * (a.y + b.y);
  }
  const double area = 0.5 * twice_area;
  const double eps = kDegenerateAreaRel * (hix - lox) * (hiy - loy);
  if (!(area > eps)) throw DegeneratePolygon("degenerate or non-CCW polygon");
  const double s = 1.0 / (6.0 * area);
  return {area, {origin.x + s * cx, origin.y + s * cy}};
}

// Derived scalars of one convex cell: area, centroid, longest/shortest edge,
// max centroid-to-vertex and min centroid-to-edge distance.
struct PolygonShape {
  double area = 0.0;
  Point2 centroid;
  double longest_edge = 0.0;
  double shortest_edge = 0.0;
  double max_vertex_dist = 0.0;  // over vertices
  double min_edge_dist = 0.0;    // perpendicular distance, over edges
};

inline PolygonShape polygon_shape(std::span<const Point2> verts) {
  PolygonShape s;
  const AreaCentroid ac = polygon_area_centroid(verts);
  s.area = ac.area;
  s.centroid = ac.centroid;
  s.longest_edge = 0.0;
  s.shortest_edge = std::numeric_limits<double>::infinity();
  s.max_vertex_dist = 0.0;
  s.min_edge_dist = std::numeric_limits<double>::infinity();
  const std::size_t n = verts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = verts[i];
    const Point2 b = verts[(i + 1) % n];
    const double len = dist(a, b);
    s.longest_edge = std::max(s.longest_edge, len);
    s.shortest_edge = std::min(s.shortest_edge, len);
    s.max_vertex_dist = std::max(s.max_vertex_dist, dist(a, s.centroid));
    if (len > 0.0) {
      const double d = std::abs(cross(b - a, s.centroid - a)) / len;
      s.min_edge_dist = std::min(s.min_edge_dist, d);
    }
  }
  return s;
}

enum class LoopCheck {
  Ok,
  TooFewVertices,
  NonFinite,
  DegenerateEdge,
  NotCcw,
  NotConvex,
};

// Orientation/convexity check for a vertex loop. Consecutive collinear
// vertices are legal (they encode aligned edges of neighbours); each interior
// turn may be left or straight up to the angle slack.
inline LoopCheck check_convex_loop(std::span<const Point2> verts) {
  const std::size_t n = verts.size();
  if (n < 3) return LoopCheck::TooFewVertices;
  for (const Point2& p : verts)
    if (!is_finite(p)) return LoopCheck::NonFinite;
  double twice_area = 0.0;
  for (std::size_t i = 0; i < n; ++i) twice_area += cross(verts[i], verts[(i + 1) % n]);
  if (twice_area <= 0.0) return LoopCheck::NotCcw;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = verts[i];
    const Point2 b = verts[(i + 1) % n];
    const Point2 c = verts[(i + 2) % n];
    const double la = dist(a, b);
    const double lb = dist(b, c);
    if (la == 0.0) return LoopCheck::DegenerateEdge;
    const double turn = cross(b - a, c - b);
    if (turn < -kAngleSlack * la * lb) return LoopCheck::NotConvex;
  }
  return LoopCheck::Ok;
}

// Non-owning view of one convex CCW cell with its derived scalars.
struct ConvexPolygonView {
  std::span<const Point2> verts;
  PolygonShape shape;

  explicit ConvexPolygonView(std::span<const Point2> v) : verts(v), shape(polygon_shape(v)) {}

  std::size_t size() const { return verts.size(); }
  Point2 vertex(std::size_t i) const { return verts[i]; }
};

// Cut line through an anchor point (the centroid in all callers); dir has
// unit norm.
struct CutLine {
  Point2 anchor;
  Point2 dir;
};

// Area inertia tensor about the centroid, from exact per-triangle closed
// forms over the fan: I = [[Iyy', -Ixy], [-Ixy, Ixx']] with Iyy' = int (y-yc)^2,
// Ixx' = int (x-xc)^2.
struct InertiaTensor {
  double ixx = 0.0;  // int (y - yc)^2 dA
  double ixy = 0.0;  // -int (x - xc)(y - yc) dA
  double iyy = 0.0;  // int (x - xc)^2 dA

  double trace() const { return ixx + iyy; }
};

inline InertiaTensor inertia_tensor(const ConvexPolygonView& poly) {
  const Point2 c = poly.shape.centroid;
  const std::size_t n = poly.size();
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = poly.vertex(i) - c;
    const Point2 b = poly.vertex((i + 1) % n) - c;
    const double w = 0.5 * cross(a, b);  // signed fan-triangle area
    // Exact monomial integrals over the triangle (0, a, b).
    sxx += w / 6.0 * (a.x * a.x + b.x * b.x + a.x * b.x);
    syy += w / 6.0 * (a.y * a.y + b.y * b.y + a.y * b.y);
    sxy += w / 12.0 * (2.0 * a.x * a.y + 2.0 * b.x * b.y + a.x * b.y + a.y * b.x);
  }
  return {syy, -sxy, sxx};
}

namespace detail {
// Deterministic canonical sign: prefer dir.y > 0, fall back to dir.x > 0.
inline Point2 canonical_direction(Point2 d) {
  const double len = norm(d);
  Point2 u{d.x / len, d.y / len};
  if (u.y < 0.0 || (u.y == 0.0 && u.x < 0.0)) u = -1.0 * u;
  return u;
}
}  // namespace detail

// Line through the centroid parallel to the eigenvector of the maximum
// eigenvalue of the inertia tensor; for an elongated cell this crosses the
// long dimension. Near-equal eigenvalues fall back to direction (0,1).
inline CutLine max_moment_direction(const ConvexPolygonView& poly) {
  const InertiaTensor I = inertia_tensor(poly);
  const double mean = 0.5 * (I.ixx + I.iyy);
  const double half_gap = 0.5 * (I.ixx - I.iyy);
  const double r = std::sqrt(half_gap * half_gap + I.ixy * I.ixy);
  const double lmax = mean + r;
  const double lmin = mean - r;
  if (std::abs(lmax - lmin) <= 1e-9 * I.trace())
    return {poly.shape.centroid, {0.0, 1.0}};
  // Eigenvector of [[ixx, ixy], [ixy, iyy]] for lmax; pick the better
  // conditioned of the two equivalent forms.
  Point2 v1{I.ixy, lmax - I.ixx};
  Point2 v2{lmax - I.iyy, I.ixy};
  const Point2 v = (dot(v1, v1) >= dot(v2, v2)) ? v1 : v2;
  return {poly.shape.centroid, detail::canonical_direction(v)};
}

struct DiagonalCut {
  std::size_t i = 0;  // vertex index pair realizing the longest diagonal
  std::size_t j = 0;
  CutLine line;  // through the centroid, orthogonal to the diagonal
};

// Longest diagonal by brute force over vertex pairs (edges count, so this is
// well-defined for triangles). Ties keep the lexicographically lowest pair.
inline DiagonalCut longest_diagonal(const ConvexPolygonView& poly) {
  const std::size_t n = poly.size();
  DiagonalCut best;
  double best_d2 = -1.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point2 d = poly.vertex(j) - poly.vertex(i);
      const double d2 = dot(d, d);
      if (d2 > best_d2) {
        best_d2 = d2;
        best.i = i;
        best.j = j;
      }
    }
  }
  const Point2 d = poly.vertex(best.j) - poly.vertex(best.i);
  best.line = {poly.shape.centroid, detail::canonical_direction({-d.y, d.x})};
  return best;
}

// One intersection of a cut line with the boundary. Hits within the vertex
// snap tolerance of a loop vertex are reported at that vertex with t in {0,1}.
struct BoundaryHit {
  int edge = -1;      // loop edge index (vertex(edge) -> vertex(edge+1))
  Point2 point;       // intersection point (the vertex when snapped)
  double t = 0.0;     // parametric position on the edge
  int vertex = -1;    // loop vertex index when snapped, else -1
};

// Intersections of a line through the polygon interior with the boundary.
// Exactly two hits exist for a convex cell; anything else throws.
inline std::vector<BoundaryHit> line_boundary_intersections(const ConvexPolygonView& poly,
                                                            const CutLine& line) {
  const std::size_t n = poly.size();
  const double snap = kVertexSnapRel * poly.shape.longest_edge;
  std::vector<BoundaryHit> hits;
  std::vector<char> vertex_done(n, 0);
  // Signed perpendicular distance of each vertex to the line.
  std::vector<double> side(n);
  for (std::size_t i = 0; i < n; ++i) side[i] = cross(line.dir, poly.vertex(i) - line.anchor);

  auto push_vertex_hit = [&](std::size_t v) {
    if (vertex_done[v]) return;
    vertex_done[v] = 1;
    hits.push_back({static_cast<int>(v), poly.vertex(v), 0.0, static_cast<int>(v)});
  };

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const bool on_i = std::abs(side[i]) <= snap;
    const bool on_j = std::abs(side[j]) <= snap;
    if (on_i) {
      push_vertex_hit(i);
      continue;
    }
    if (on_j) continue;  // handled as the start of edge j
    if (side[i] * side[j] < 0.0) {
      const double t = side[i] / (side[i] - side[j]);
      const Point2 a = poly.vertex(i);
      const Point2 b = poly.vertex(j);
      const Point2 p = a + t * (b - a);
      if (dist(p, a) <= snap) {
        push_vertex_hit(i);
      } else if (dist(p, b) <= snap) {
        push_vertex_hit(j);
      } else {
        hits.push_back({static_cast<int>(i), p, t, -1});
      }
    }
  }
  if (hits.size() != 2)
    throw NoIntersection("cut line produced " + std::to_string(hits.size()) +
                         " boundary hits (expected 2)");
  std::sort(hits.begin(), hits.end(), [](const BoundaryHit& a, const BoundaryHit& b) {
    return a.edge != b.edge ? a.edge < b.edge : a.t < b.t;
  });
  return hits;
}

}  // namespace polyref
