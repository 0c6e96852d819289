#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "polyref/mesh.hpp"
#include "polyref/quality.hpp"

using namespace polyref;
using Catch::Approx;

namespace {

PolyMesh single_cell(const std::vector<Point2>& pts) {
  std::vector<Index> loop(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) loop[i] = static_cast<Index>(i);
  return build_mesh(pts, {loop});
}

}  // namespace

TEST_CASE("element quality parameters") {
  SECTION("unit square") {
    PolyMesh m = single_cell({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    const ElementQuality q = element_quality(m, 0);
    REQUIRE(q.ar_rr == Approx(std::sqrt(2.0)).epsilon(1e-12));
    REQUIRE(q.ar_hr == Approx(2.0).epsilon(1e-12));
    REQUIRE(q.ar_hh == Approx(1.0).epsilon(1e-12));
    REQUIRE(q.ar_edge == Approx(1.0).epsilon(1e-12));
  }
  SECTION("equilateral triangle: R = 2r") {
    const double h = std::sqrt(3.0) / 2.0;
    PolyMesh m = single_cell({{0, 0}, {1, 0}, {0.5, h}});
    const ElementQuality q = element_quality(m, 0);
    REQUIRE(q.ar_rr == Approx(2.0).epsilon(1e-12));
    REQUIRE(q.ar_hh == Approx(1.0).epsilon(1e-12));
    REQUIRE(q.ar_edge == Approx(1.0).epsilon(1e-12));
  }
  SECTION("2x1 rectangle") {
    PolyMesh m = single_cell({{0, 0}, {2, 0}, {2, 1}, {0, 1}});
    const ElementQuality q = element_quality(m, 0);
    REQUIRE(q.ar_hh == Approx(2.0).epsilon(1e-12));
    REQUIRE(q.ar_edge == Approx(2.0).epsilon(1e-12));
  }
  SECTION("all parameters are at least 1 and rigid-motion invariant") {
    std::mt19937 rng(9001);
    std::uniform_real_distribution<double> ua(0.0, 6.28), us(0.1, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
      const auto poly = testutil::random_convex_polygon(rng);
      PolyMesh m = single_cell(poly);
      const ElementQuality q = element_quality(m, 0);
      REQUIRE(q.ar_rr >= 1.0);
      REQUIRE(q.ar_hr >= 1.0);
      REQUIRE(q.ar_hh >= 1.0);
      REQUIRE(q.ar_edge >= 1.0);
      const double angle = ua(rng), scale = us(rng);
      auto moved = testutil::rotate_all(poly, angle, {3.0, -7.0});
      for (auto& p : moved) p = scale * p;
      PolyMesh m2 = single_cell(moved);
      const ElementQuality q2 = element_quality(m2, 0);
      REQUIRE(q2.ar_rr == Approx(q.ar_rr).epsilon(1e-10));
      REQUIRE(q2.ar_hr == Approx(q.ar_hr).epsilon(1e-10));
      REQUIRE(q2.ar_hh == Approx(q.ar_hh).epsilon(1e-10));
      REQUIRE(q2.ar_edge == Approx(q.ar_edge).epsilon(1e-10));
    }
  }
}

TEST_CASE("mesh statistics") {
  SECTION("two-triangle unit square") {
    PolyMesh m = build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}});
    const MeshStats s = mesh_stats(m);
    REQUIRE(s.n_cells == 2);
    REQUIRE(s.n_points == 4);
    REQUIRE(s.e_ratio == Approx(2.0));
    REQUIRE(s.r_tri == Approx(1.0));
    REQUIRE(s.r_quad == Approx(0.0));
    REQUIRE(s.r_tri + s.r_quad <= 1.0 + 1e-15);
  }
  SECTION("structured triangulations trend to about half a point per cell") {
    auto ratio = [](int n) {
      std::vector<Point2> pts;
      for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) pts.push_back({double(i) / n, double(j) / n});
      std::vector<std::vector<Index>> loops;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const Index v = static_cast<Index>(j * (n + 1) + i);
          const Index r = static_cast<Index>(n + 1);
          loops.push_back({v, v + 1, v + r});
          loops.push_back({v + 1, v + 1 + r, v + r});
        }
      return mesh_stats(build_mesh(pts, loops)).e_ratio;
    };
    const double r8 = ratio(8), r16 = ratio(16);
    REQUIRE(std::abs(r16 - 0.5) < std::abs(r8 - 0.5));
    REQUIRE(r16 < 0.6);
  }
  SECTION("single regular 120-gon") {
    std::vector<Point2> pts;
    for (int k = 0; k < 120; ++k)
      pts.push_back({std::cos(2 * M_PI * k / 120.0), std::sin(2 * M_PI * k / 120.0)});
    PolyMesh m = single_cell(pts);
    const MeshStats s = mesh_stats(m);
    REQUIRE(s.n_cells == 1);
    REQUIRE(s.n_points == 120);
    REQUIRE(s.r_tri == 0.0);
    const ElementQuality q = element_quality(m, 0);
    REQUIRE(q.ar_edge == Approx(1.0).epsilon(1e-12));
  }
  SECTION("hanging nodes count raw loop vertices") {
    PolyMesh m = build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {1, 2}, {0, 2}},
                            {{0, 1, 2, 3}, {3, 2, 4, 5}});
    Index bottom = kNone, shared = kNone;
    for (std::size_t e = 0; e < m.num_edge_slots(); ++e) {
      const Edge& ed = m.edge(static_cast<Index>(e));
      if (ed.has_endpoint(0) && ed.has_endpoint(1)) bottom = static_cast<Index>(e);
      if (ed.has_endpoint(2) && ed.has_endpoint(3)) shared = static_cast<Index>(e);
    }
    m.split_cell(0, SplitLocus::at_edges({bottom}), SplitLocus::at_edges({shared}));
    const MeshStats s = mesh_stats(m);
    // The top square now has 5 raw vertices: neither a triangle nor a quad.
    REQUIRE(s.n_cells == 3);
    REQUIRE(s.n_quad == 2);
    REQUIRE(s.n_tri == 0);
  }
}
