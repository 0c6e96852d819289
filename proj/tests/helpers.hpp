#pragma once

// Shared test utilities: deterministic random convex polygons and small
// oracles kept independent of the library code paths they check.

#include <algorithm>
#include <random>
#include <vector>

#include "polyref/geometry.hpp"

namespace testutil {

using polyref::Point2;

// Andrew monotone chain; returns a CCW hull without collinear points.
inline std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<Point2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && polyref::cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
    while (k >= t && polyref::cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline std::vector<Point2> random_convex_polygon(std::mt19937& rng, int cloud = 12,
                                                 double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<Point2> pts;
  for (;;) {
    pts.clear();
    for (int i = 0; i < cloud; ++i) pts.push_back({u(rng), u(rng)});
    std::vector<Point2> hull = convex_hull(pts);
    if (hull.size() >= 3 && polyref::polygon_area_centroid(hull).area > 0.05 * scale * scale)
      return hull;
  }
}

inline Point2 rotate(Point2 p, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

inline std::vector<Point2> rotate_all(const std::vector<Point2>& pts, double angle,
                                      Point2 shift = {0, 0}) {
  std::vector<Point2> out;
  out.reserve(pts.size());
  for (Point2 p : pts) out.push_back(rotate(p, angle) + shift);
  return out;
}

}  // namespace testutil
