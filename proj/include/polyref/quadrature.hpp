#pragma once

// Triangle quadrature and polygon integration over the centroid fan. The
// degree-5 rule has a graded variant for integrands with a point singularity
// at one triangle vertex (recursive dyadic subdivision toward it).

#include <array>
#include <cmath>

#include "polyref/geometry.hpp"

namespace polyref {

struct TrianglePoint {
  double l0, l1, l2;  // barycentric coordinates
  double w;           // weight relative to the triangle area
};

// Midpoint rule, exact for polynomials of degree 2.
inline constexpr std::array<TrianglePoint, 3> kTriangleDeg2 = {{
    {0.5, 0.5, 0.0, 1.0 / 3.0},
    {0.0, 0.5, 0.5, 1.0 / 3.0},
    {0.5, 0.0, 0.5, 1.0 / 3.0},
}};

namespace detail {
inline std::array<TrianglePoint, 7> make_deg5() {
  const double s15 = std::sqrt(15.0);
  const double a1 = (6.0 - s15) / 21.0, w1 = (155.0 - s15) / 1200.0;
  const double a2 = (6.0 + s15) / 21.0, w2 = (155.0 + s15) / 1200.0;
  return {{
      {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0},
      {a1, a1, 1.0 - 2.0 * a1, w1},
      {a1, 1.0 - 2.0 * a1, a1, w1},
      {1.0 - 2.0 * a1, a1, a1, w1},
      {a2, a2, 1.0 - 2.0 * a2, w2},
      {a2, 1.0 - 2.0 * a2, a2, w2},
      {1.0 - 2.0 * a2, a2, a2, w2},
  }};
}
}  // namespace detail

// 7-point rule, exact for polynomials of degree 5.
inline const std::array<TrianglePoint, 7> kTriangleDeg5 = detail::make_deg5();

template <typename Rule, typename F>
double integrate_triangle(Point2 a, Point2 b, Point2 c, const Rule& rule, F&& f) {
  const double area = 0.5 * cross(b - a, c - a);
  double acc = 0.0;
  for (const TrianglePoint& q : rule) {
    const Point2 p = q.l0 * a + q.l1 * b + q.l2 * c;
    acc += q.w * f(p);
  }
  return area * acc;
}

// Integral over a convex cell via fan triangles from the centroid.
template <typename Rule, typename F>
double integrate_polygon(const ConvexPolygonView& poly, const Rule& rule, F&& f) {
  const Point2 c = poly.shape.centroid;
  double acc = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i)
    acc += integrate_triangle(c, poly.vertex(i), poly.vertex((i + 1) % n), rule, f);
  return acc;
}

// Degree-5 integration of a triangle whose integrand is singular at vertex
// `s`. The two legs at s are halved `levels` times; the far pieces use the
// plain rule and only the innermost sliver is reached by it directly.
template <typename F>
double integrate_triangle_graded(Point2 s, Point2 a, Point2 b, int levels, F&& f) {
  double acc = 0.0;
  Point2 ca = a, cb = b;
  for (int l = 0; l < levels; ++l) {
    const Point2 ma = 0.5 * (s + ca);
    const Point2 mb = 0.5 * (s + cb);
    acc += integrate_triangle(ma, ca, cb, kTriangleDeg5, f);
    acc += integrate_triangle(ma, cb, mb, kTriangleDeg5, f);
    ca = ma;
    cb = mb;
  }
  acc += integrate_triangle(s, ca, cb, kTriangleDeg5, f);
  return acc;
}

}  // namespace polyref
