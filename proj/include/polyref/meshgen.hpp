#pragma once

// Built-in initial-mesh generators: structured triangular and trapezoidal
// L-shape meshes, Lloyd-relaxed clipped-Voronoi polygonal L-shape meshes, and
// regular N-gons. The L-shaped domain is (-1,1)^2 minus (-1,0)^2.

#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "polyref/geometry.hpp"
#include "polyref/mesh.hpp"

namespace polyref {

struct GenerationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace meshgen_detail {

inline bool in_lshape(Point2 p) { return !(p.x < 0.0 && p.y < 0.0); }

// Grid point index map for the L-shape lattice i,j in [-n, n], skipping the
// open removed quadrant.
class LGrid {
 public:
  explicit LGrid(int n) : n_(n) {}
  bool kept(int i, int j) const { return i >= 0 || j >= 0; }
  Index id(int i, int j) const { return ids_.at(key(i, j)); }
  Index add(std::vector<Point2>& pts, int i, int j, Point2 p) {
    const Index v = static_cast<Index>(pts.size());
    pts.push_back(p);
    ids_.emplace(key(i, j), v);
    return v;
  }

 private:
  long long key(int i, int j) const {
    return (static_cast<long long>(i + n_) << 20) | static_cast<long long>(j + n_);
  }
  int n_;
  std::unordered_map<long long, Index> ids_;
};

}  // namespace meshgen_detail

// Structured right-triangle mesh: each of the 3 unit squares splits into n^2
// subsquares, each cut along the diagonal pointing at the re-entrant corner.
inline PolyMesh lshape_triangular(int n) {
  if (n < 1) throw GenerationFailure("subdivision count must be positive");
  meshgen_detail::LGrid grid(n);
  std::vector<Point2> pts;
  for (int j = -n; j <= n; ++j)
    for (int i = -n; i <= n; ++i)
      if (grid.kept(i, j))
        grid.add(pts, i, j, {static_cast<double>(i) / n, static_cast<double>(j) / n});

  std::vector<std::vector<Index>> loops;
  for (int j = -n; j < n; ++j) {
    for (int i = -n; i < n; ++i) {
      if (i < 0 && j < 0) continue;  // removed quadrant
      const Index q[4] = {grid.id(i, j), grid.id(i + 1, j), grid.id(i + 1, j + 1),
                          grid.id(i, j + 1)};
      // Diagonal from the corner nearest the origin to the opposite one.
      int lo = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 4; ++k) {
        const Point2 p = pts[static_cast<std::size_t>(q[k])];
        const double d2 = dot(p, p);
        if (d2 < best) {
          best = d2;
          lo = k;
        }
      }
      const int a = lo, b = (lo + 1) % 4, c = (lo + 2) % 4, d = (lo + 3) % 4;
      loops.push_back({q[a], q[b], q[c]});
      loops.push_back({q[a], q[c], q[d]});
    }
  }
  return build_mesh(std::move(pts), loops);
}

// Structured quad mesh whose interior horizontal lines zigzag by 0.2/n,
// producing convex trapezoids with vertical parallel sides. Points on the
// domain boundary lines y = +-1, and y = 0 for x <= 0, stay put.
inline PolyMesh lshape_trapezoidal(int n) {
  if (n < 1) throw GenerationFailure("subdivision count must be positive");
  meshgen_detail::LGrid grid(n);
  std::vector<Point2> pts;
  const double offset = 0.2 / n;
  for (int j = -n; j <= n; ++j) {
    for (int i = -n; i <= n; ++i) {
      if (!grid.kept(i, j)) continue;
      double y = static_cast<double>(j) / n;
      const bool on_outer = (j == -n || j == n);
      const bool on_reentrant = (j == 0 && i <= 0);
      if (!on_outer && !on_reentrant) y += ((i + j) % 2 == 0) ? offset : -offset;
      grid.add(pts, i, j, {static_cast<double>(i) / n, y});
    }
  }
  std::vector<std::vector<Index>> loops;
  for (int j = -n; j < n; ++j)
    for (int i = -n; i < n; ++i) {
      if (i < 0 && j < 0) continue;
      loops.push_back({grid.id(i, j), grid.id(i + 1, j), grid.id(i + 1, j + 1), grid.id(i, j + 1)});
    }
  return build_mesh(std::move(pts), loops);
}

// Single-cell regular polygon inscribed in a circle.
inline PolyMesh regular_polygon(int n_sides, double radius = 1.0) {
  if (n_sides < 3) throw GenerationFailure("a polygon needs at least 3 sides");
  std::vector<Point2> pts;
  std::vector<Index> loop;
  for (int k = 0; k < n_sides; ++k) {
    const double a = 2.0 * M_PI * k / n_sides;
    pts.push_back({radius * std::cos(a), radius * std::sin(a)});
    loop.push_back(static_cast<Index>(k));
  }
  return build_mesh(std::move(pts), {loop});
}

namespace meshgen_detail {

using Poly = std::vector<Point2>;

// Sutherland-Hodgman clip against the half-plane dot(n, p) <= c.
inline Poly clip_half_plane(const Poly& poly, Point2 n, double c) {
  Poly out;
  const std::size_t m = poly.size();
  if (m == 0) return out;
  out.reserve(m + 2);
  for (std::size_t i = 0; i < m; ++i) {
    const Point2 cur = poly[i];
    const Point2 nxt = poly[(i + 1) % m];
    const double dc = dot(n, cur) - c;
    const double dn = dot(n, nxt) - c;
    if (dc <= 0.0) out.push_back(cur);
    if ((dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn <= 0.0)) {
      const double t = dc / (dc - dn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

inline double poly_area(const Poly& p) {
  if (p.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) twice += cross(p[i], p[(i + 1) % p.size()]);
  return 0.5 * twice;
}

inline Point2 poly_centroid(const Poly& p) {
  double twice = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double w = cross(p[i], p[(i + 1) % p.size()]);
    twice += w;
    cx += w * (p[i].x + p[(i + 1) % p.size()].x);
    cy += w * (p[i].y + p[(i + 1) % p.size()].y);
  }
  return {cx / (3.0 * twice), cy / (3.0 * twice)};
}

// Voronoi cell of site k within the bounding square, as the intersection of
// the canonical pairwise bisector half-planes over all sites (real seeds
// plus reflected phantoms).
inline Poly voronoi_cell(const std::vector<Point2>& sites, std::size_t k) {
  Poly cell = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  for (std::size_t j = 0; j < sites.size(); ++j) {
    if (j == k || cell.empty()) continue;
    const std::size_t a = std::min(j, k);
    const std::size_t b = std::max(j, k);
    Point2 n = sites[b] - sites[a];
    double c = dot(n, 0.5 * (sites[a] + sites[b]));
    if (k == b) {
      n = -1.0 * n;
      c = -c;
    }
    cell = clip_half_plane(cell, n, c);
  }
  return cell;
}

// Seeds mirrored across every domain face (and through the re-entrant corner
// for first-quadrant seeds). All phantoms land outside the L-shape, so the
// domain boundary becomes Voronoi-aligned and clipped cells stay convex.
inline std::vector<Point2> with_phantom_sites(const std::vector<Point2>& seeds) {
  std::vector<Point2> sites = seeds;
  for (const Point2 s : seeds) {
    sites.push_back({2.0 - s.x, s.y});
    sites.push_back({-2.0 - s.x, s.y});
    sites.push_back({s.x, 2.0 - s.y});
    sites.push_back({s.x, -2.0 - s.y});
    if (s.x > 0.0 && s.y < 0.0) sites.push_back({-s.x, s.y});
    if (s.x < 0.0 && s.y > 0.0) sites.push_back({s.x, -s.y});
    if (s.x > 0.0 && s.y > 0.0) sites.push_back({-s.x, -s.y});
  }
  return sites;
}

// Intersection with the L-shape as at most two convex pieces, split along
// the corner bisector y = x when the cell strictly contains the origin.
inline std::vector<Poly> clip_to_lshape(const Poly& cell) {
  constexpr double kTinyArea = 1e-12;
  std::vector<Poly> pieces;
  Poly removed = clip_half_plane(clip_half_plane(cell, {1, 0}, 0.0), {0, 1}, 0.0);
  if (poly_area(removed) <= kTinyArea) {
    if (poly_area(cell) > kTinyArea) pieces.push_back(cell);
    return pieces;
  }
  Poly top = clip_half_plane(clip_half_plane(cell, {0, -1}, 0.0), {1, -1}, 0.0);
  Poly right = clip_half_plane(clip_half_plane(cell, {-1, 0}, 0.0), {-1, 1}, 0.0);
  if (poly_area(top) > kTinyArea) pieces.push_back(std::move(top));
  if (poly_area(right) > kTinyArea) pieces.push_back(std::move(right));
  return pieces;
}

// Merge coincident vertices (different cells compute shared corners
// independently, so coordinates agree only up to roundoff).
class PointWelder {
 public:
  explicit PointWelder(double eps) : eps_(eps) {}

  Index lookup_or_add(std::vector<Point2>& pts, Point2 p) {
    const long long qx = static_cast<long long>(std::floor(p.x / eps_));
    const long long qy = static_cast<long long>(std::floor(p.y / eps_));
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        const auto it = grid_.find(key(qx + dx, qy + dy));
        if (it == grid_.end()) continue;
        for (Index v : it->second)
          if (dist(pts[static_cast<std::size_t>(v)], p) <= eps_) return v;
      }
    const Index v = static_cast<Index>(pts.size());
    pts.push_back(p);
    grid_[key(qx, qy)].push_back(v);
    return v;
  }

 private:
  static long long key(long long qx, long long qy) { return (qx << 28) ^ (qy & ((1 << 28) - 1)); }
  double eps_;
  std::unordered_map<long long, std::vector<Index>> grid_;
};

}  // namespace meshgen_detail

// Lloyd-relaxed Voronoi partition of the L-shape. Deterministic for a fixed
// rng seed. Cells that straddle the re-entrant corner are split along the
// corner bisector, so the cell count can exceed n_seeds in that rare case.
inline PolyMesh lshape_polygonal(int n_seeds, unsigned rng_seed, int lloyd_iters) {
  using namespace meshgen_detail;
  if (n_seeds < 3) throw GenerationFailure("need at least 3 seeds");
  std::mt19937 rng(rng_seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point2> seeds;
  while (static_cast<int>(seeds.size()) < n_seeds) {
    const Point2 p{u(rng), u(rng)};
    if (in_lshape(p)) seeds.push_back(p);
  }

  std::vector<std::vector<Poly>> pieces(seeds.size());
  for (int iter = 0; iter <= lloyd_iters; ++iter) {
    const std::vector<Point2> sites = with_phantom_sites(seeds);
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      pieces[k] = clip_to_lshape(voronoi_cell(sites, k));
      if (pieces[k].empty())
        throw GenerationFailure("seed " + std::to_string(k) + " lost its cell");
    }
    if (iter == lloyd_iters) break;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      double area = 0.0;
      Point2 weighted{0, 0};
      double largest = -1.0;
      Point2 largest_centroid{0, 0};
      for (const Poly& p : pieces[k]) {
        const double a = poly_area(p);
        const Point2 c = poly_centroid(p);
        area += a;
        weighted = weighted + a * c;
        if (a > largest) {
          largest = a;
          largest_centroid = c;
        }
      }
      Point2 next = (1.0 / area) * weighted;
      if (!in_lshape(next)) next = largest_centroid;  // union centroid fell in the notch
      seeds[k] = next;
    }
  }

  std::vector<Point2> pts;
  std::vector<std::vector<Index>> loops;
  PointWelder welder(1e-9);
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    for (const Poly& p : pieces[k]) {
      std::vector<Index> loop;
      for (const Point2 q : p) {
        const Index v = welder.lookup_or_add(pts, q);
        if (loop.empty() || loop.back() != v) loop.push_back(v);
      }
      while (loop.size() > 1 && loop.front() == loop.back()) loop.pop_back();
      if (loop.size() >= 3) loops.push_back(std::move(loop));
    }
  }
  try {
    return build_mesh(std::move(pts), loops);
  } catch (const MeshError& err) {
    throw GenerationFailure(std::string("voronoi mesh is inconsistent: ") + err.what());
  }
}

}  // namespace polyref
