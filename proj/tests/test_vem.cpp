#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "polyref/mesh.hpp"
#include "polyref/problems.hpp"
#include "polyref/vem.hpp"

using namespace polyref;
using Catch::Approx;

namespace {

const std::vector<Point2> kUnitSquare = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
const std::vector<Point2> kRightTriangle = {{0, 0}, {1, 0}, {0, 1}};

// Classical P1 stiffness oracle: K_ij = area * grad(phi_i) . grad(phi_j).
Eigen::Matrix3d p1_stiffness(const std::vector<Point2>& t, double diffusion) {
  const double twice_area = cross(t[1] - t[0], t[2] - t[0]);
  Eigen::Matrix3d grads;  // rows: gradient of each hat function
  for (int i = 0; i < 3; ++i) {
    const Point2 opp = t[(i + 2) % 3] - t[(i + 1) % 3];
    grads(i, 0) = -opp.y / twice_area;
    grads(i, 1) = opp.x / twice_area;
    grads(i, 2) = 0.0;
  }
  return diffusion * 0.5 * twice_area * grads * grads.transpose();
}

// Mixed triangle/quad partition of the 2x1 rectangle.
PolyMesh mixed_mesh() {
  return build_mesh({{0, 0}, {1, 0}, {2, 0}, {2, 1}, {1, 1}, {0, 1}},
                    {{0, 1, 4, 5}, {1, 2, 4}, {2, 3, 4}});
}

}  // namespace

TEST_CASE("projector reproduces P1") {
  SECTION("monomial and constant dofs on the unit square") {
    ConvexPolygonView v(kUnitSquare);
    const Matrix3X P = projector_matrix(v);
    const Eigen::MatrixXd D = monomial_dof_matrix(v);
    const Eigen::Vector3d from_m1 = P * D.col(1);
    REQUIRE(from_m1(0) == Approx(0.0).margin(1e-13));
    REQUIRE(from_m1(1) == Approx(1.0).epsilon(1e-13));
    REQUIRE(from_m1(2) == Approx(0.0).margin(1e-13));
    const Eigen::Vector3d from_ones = P * Eigen::VectorXd::Ones(4);
    REQUIRE(from_ones(0) == Approx(1.0).epsilon(1e-13));
    REQUIRE(from_ones(1) == Approx(0.0).margin(1e-13));
    REQUIRE(from_ones(2) == Approx(0.0).margin(1e-13));
  }
  SECTION("triangle projector equals the P1 interpolation matrix") {
    ConvexPolygonView v(kRightTriangle);
    const Matrix3X P = projector_matrix(v);
    // On a triangle the projector inverts the scaled-monomial Vandermonde.
    const Eigen::Matrix3d D = monomial_dof_matrix(v);
    const Eigen::Matrix3d interp = D.inverse();
    REQUIRE((Eigen::Matrix3d(P) - interp).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("idempotence on random polygons and linear data") {
    std::mt19937 rng(4201);
    std::uniform_real_distribution<double> uc(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
      const auto poly = testutil::random_convex_polygon(rng);
      ConvexPolygonView v(poly);
      const Matrix3X P = projector_matrix(v);
      const Eigen::MatrixXd D = monomial_dof_matrix(v);
      const Eigen::Vector3d c{uc(rng), uc(rng), uc(rng)};
      const Eigen::Vector3d back = P * (D * c);
      REQUIRE((back - c).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("local stiffness") {
  SECTION("constants are in the kernel") {
    std::mt19937 rng(4202);
    for (int trial = 0; trial < 50; ++trial) {
      const auto poly = testutil::random_convex_polygon(rng);
      const Eigen::MatrixXd K = local_stiffness(ConvexPolygonView(poly), 1.0);
      const Eigen::VectorXd sums = K.rowwise().sum();
      REQUIRE(sums.cwiseAbs().maxCoeff() < 1e-12 * K.cwiseAbs().maxCoeff());
    }
  }
  SECTION("triangle matches classical P1 elementwise") {
    std::mt19937 rng(4203);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Point2> t;
      do {
        t = {{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
        if (cross(t[1] - t[0], t[2] - t[0]) < 0.0) std::swap(t[1], t[2]);
      } while (cross(t[1] - t[0], t[2] - t[0]) < 0.2);
      const Eigen::MatrixXd K = local_stiffness(ConvexPolygonView(t), 3.5);
      const Eigen::Matrix3d F = p1_stiffness(t, 3.5);
      REQUIRE((Eigen::Matrix3d(K) - F).cwiseAbs().maxCoeff() < 1e-12 * F.cwiseAbs().maxCoeff());
    }
  }
  SECTION("unit square: energy of u = x is 1") {
    ConvexPolygonView v(kUnitSquare);
    const Eigen::MatrixXd K = local_stiffness(v, 1.0);
    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x(i) = kUnitSquare[static_cast<std::size_t>(i)].x;
    REQUIRE(x.dot(K * x) == Approx(1.0).epsilon(1e-12));
  }
  SECTION("kernel is exactly the constants") {
    std::mt19937 rng(4204);
    const auto poly = testutil::random_convex_polygon(rng);
    const Eigen::MatrixXd K = local_stiffness(ConvexPolygonView(poly), 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
    REQUIRE(es.eigenvalues()(0) > -1e-10);
    REQUIRE(es.eigenvalues()(0) < 1e-10);
    REQUIRE(es.eigenvalues()(1) > 1e-8);
  }
}

TEST_CASE("projector condition number") {
  SECTION("at least one, and invariant under similarity") {
    std::mt19937 rng(4205);
    std::uniform_real_distribution<double> ua(0.0, 6.28), us(0.05, 20.0);
    for (int trial = 0; trial < 50; ++trial) {
      const auto poly = testutil::random_convex_polygon(rng);
      const double k = projector_condition(projector_matrix(ConvexPolygonView(poly)));
      REQUIRE(k >= 1.0);
      const double angle = ua(rng), scale = us(rng);
      auto moved = testutil::rotate_all(poly, angle, {5.0, 1.0});
      for (auto& p : moved) p = scale * p;
      const double k2 = projector_condition(projector_matrix(ConvexPolygonView(moved)));
      REQUIRE(k2 == Approx(k).epsilon(1e-9));
    }
  }
  SECTION("unit right triangle against an independent singular-value route") {
    ConvexPolygonView v(kRightTriangle);
    const Matrix3X P = projector_matrix(v);
    // Oracle: the exact change-of-basis matrix, singular values via the
    // eigenvalues of A^T A.
    const Eigen::Matrix3d A = Eigen::Matrix3d(monomial_dof_matrix(v)).inverse();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(A.transpose() * A);
    const double expected = std::sqrt(es.eigenvalues()(2) / es.eigenvalues()(0));
    REQUIRE(projector_condition(P) == Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("assembly and solve") {
  SECTION("patch test: u = x + y on a mixed mesh") {
    PolyMesh m = mixed_mesh();
    const PoissonProblem prob = linear_patch_problem(1.0, 1.0, 0.0);
    const Eigen::VectorXd u = solve_system(assemble(m, prob));
    for (std::size_t i = 0; i < m.num_points(); ++i) {
      const Point2 p = m.point(static_cast<Index>(i));
      REQUIRE(u(static_cast<Eigen::Index>(i)) == Approx(p.x + p.y).margin(1e-12));
    }
  }
  SECTION("constant Dirichlet data gives the constant solution") {
    PolyMesh m = mixed_mesh();
    const PoissonProblem prob = linear_patch_problem(0.0, 0.0, 1.0);
    const Eigen::VectorXd u = solve_system(assemble(m, prob));
    for (Eigen::Index i = 0; i < u.size(); ++i) REQUIRE(u(i) == Approx(1.0).margin(1e-12));
  }
  SECTION("zero forcing assembles a zero load vector") {
    PolyMesh m = mixed_mesh();
    const LinearSystem sys = assemble(m, lshape_problem());
    REQUIRE(sys.rhs.cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("projected solution gradients are the patch gradient") {
    PolyMesh m = mixed_mesh();
    const PoissonProblem prob = linear_patch_problem(2.0, -3.0, 1.0);
    const Eigen::VectorXd u = solve_system(assemble(m, prob));
    const auto polys = project_solution(m, u);
    for (std::size_t c = 0; c < m.num_cell_slots(); ++c) {
      const Point2 g = polys[c].gradient();
      REQUIRE(g.x == Approx(2.0).margin(1e-12));
      REQUIRE(g.y == Approx(-3.0).margin(1e-12));
    }
  }
}

TEST_CASE("solve_system contract") {
  SECTION("identity system returns the right-hand side") {
    LinearSystem sys;
    const int n = 6;
    sys.matrix.resize(n, n);
    sys.matrix.setIdentity();
    sys.rhs = Eigen::VectorXd::LinSpaced(n, 1.0, 6.0);
    sys.constrained.assign(n, 0);
    sys.boundary_values = Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd u = solve_system(sys);
    REQUIRE((u - sys.rhs).norm() < 1e-12);
  }
  SECTION("1D chain with unit end constraints gives a linear ramp") {
    LinearSystem sys;
    const int n = 5;
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < n; ++i) {
      t.emplace_back(i, i, 2.0);
      if (i > 0) t.emplace_back(i, i - 1, -1.0);
      if (i + 1 < n) t.emplace_back(i, i + 1, -1.0);
    }
    sys.matrix.resize(n, n);
    sys.matrix.setFromTriplets(t.begin(), t.end());
    sys.rhs = Eigen::VectorXd::Zero(n);
    sys.constrained.assign(n, 0);
    sys.constrained[0] = sys.constrained[n - 1] = 1;
    sys.boundary_values = Eigen::VectorXd::Zero(n);
    sys.boundary_values(n - 1) = 1.0;
    const Eigen::VectorXd u = solve_system(sys);
    for (int i = 0; i < n; ++i) REQUIRE(u(i) == Approx(i / 4.0).margin(1e-12));
  }
}

TEST_CASE("stabilization energy") {
  SECTION("all-triangle meshes have exactly zero stabilization") {
    PolyMesh m = build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}});
    Eigen::VectorXd u(4);
    u << 0.3, -1.2, 0.9, 2.4;
    REQUIRE(stabilization_energy(m, u, 1.0) == 0.0);
  }
  SECTION("linear data is invisible to the stabilization") {
    PolyMesh m = mixed_mesh();
    Eigen::VectorXd u(m.num_points());
    for (std::size_t i = 0; i < m.num_points(); ++i) {
      const Point2 p = m.point(static_cast<Index>(i));
      u(static_cast<Eigen::Index>(i)) = 2.0 * p.x - 3.0 * p.y + 1.0;
    }
    REQUIRE(stabilization_energy(m, u, 1.0) < 1e-20);
  }
  SECTION("oscillating square dofs are fully stabilized") {
    PolyMesh m = build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, 3}});
    Eigen::VectorXd u(4);
    u << 1.0, -1.0, 1.0, -1.0;
    // The projection of this data is identically zero, so the stabilization
    // sees the whole oscillation.
    REQUIRE(stabilization_energy(m, u, 1.0) == Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("L-shape exact solution") {
  SECTION("closed-form values") {
    REQUIRE(lshape_exact_solution({1, 0}) == Approx(std::sin(M_PI / 3.0)).epsilon(1e-12));
    REQUIRE(lshape_exact_solution({0, -1}) == Approx(0.0).margin(1e-12));
    REQUIRE(lshape_exact_solution({-1, 0}) == Approx(0.0).margin(1e-12));
  }
  SECTION("gradient matches finite differences away from the corner") {
    const double eps = 1e-7;
    for (const Point2 p : {Point2{0.7, 0.4}, Point2{-0.5, 0.3}, Point2{0.2, -0.6}}) {
      const Point2 g = lshape_exact_gradient(p);
      const double gx = (lshape_exact_solution({p.x + eps, p.y}) -
                         lshape_exact_solution({p.x - eps, p.y})) /
                        (2 * eps);
      const double gy = (lshape_exact_solution({p.x, p.y + eps}) -
                         lshape_exact_solution({p.x, p.y - eps})) /
                        (2 * eps);
      REQUIRE(g.x == Approx(gx).margin(1e-6));
      REQUIRE(g.y == Approx(gy).margin(1e-6));
    }
  }
  SECTION("gradient at the corner is an error") {
    REQUIRE_THROWS_AS(lshape_exact_gradient({0, 0}), CornerSingularity);
  }
}
