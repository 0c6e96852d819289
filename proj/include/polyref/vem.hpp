#pragma once

// First-order virtual element discretization of the Poisson problem on
// polygonal cells: the elementwise energy projector onto P1 in a scaled
// monomial basis, consistency + dof-wise stabilization, global assembly with
// Dirichlet elimination, and a direct sparse solve.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SVD>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "polyref/geometry.hpp"
#include "polyref/mesh.hpp"
#include "polyref/quadrature.hpp"

namespace polyref {

struct SingularSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Matrix3X = Eigen::Matrix<double, 3, Eigen::Dynamic>;

// Scaled monomials m0 = 1, m1 = (x - xc)/h, m2 = (y - yc)/h on one cell; h is
// the longest edge.
struct ScaledBasis {
  Point2 center;
  double h = 1.0;

  static ScaledBasis of(const ConvexPolygonView& poly) {
    return {poly.shape.centroid, poly.shape.longest_edge};
  }
  Eigen::Vector3d eval(Point2 p) const {
    return {1.0, (p.x - center.x) / h, (p.y - center.y) / h};
  }
};

// Energy projector onto P1: column i maps the i-th vertex dof to the scaled
// monomial coefficients of its projection. The gradient rows come from exact
// boundary line integrals of the piecewise-linear trace; the constant is
// fixed by matching the boundary mean.
inline Matrix3X projector_matrix(const ConvexPolygonView& poly) {
  const int n = static_cast<int>(poly.size());
  const ScaledBasis basis = ScaledBasis::of(poly);
  const double area = poly.shape.area;
  const double h = basis.h;

  Matrix3X P(3, n);
  double boundary_len = 0.0;
  Eigen::VectorXd w(n);  // trace weights: int of the i-th hat along the boundary
  for (int i = 0; i < n; ++i) {
    const Point2 prev = poly.vertex(static_cast<std::size_t>((i + n - 1) % n));
    const Point2 next = poly.vertex(static_cast<std::size_t>((i + 1) % n));
    const Point2 cur = poly.vertex(static_cast<std::size_t>(i));
    P(1, i) = h * (next.y - prev.y) / (2.0 * area);
    P(2, i) = h * (prev.x - next.x) / (2.0 * area);
    w(i) = 0.5 * (dist(prev, cur) + dist(cur, next));
    boundary_len += dist(cur, next);
  }
  double b1 = 0.0, b2 = 0.0;  // boundary integrals of m1, m2
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d m = basis.eval(poly.vertex(static_cast<std::size_t>(i)));
    b1 += w(i) * m(1);
    b2 += w(i) * m(2);
  }
  for (int i = 0; i < n; ++i) P(0, i) = (w(i) - b1 * P(1, i) - b2 * P(2, i)) / boundary_len;
  return P;
}

// Vertex values of the scaled monomials (the N x 3 dof matrix).
inline Eigen::MatrixXd monomial_dof_matrix(const ConvexPolygonView& poly) {
  const int n = static_cast<int>(poly.size());
  const ScaledBasis basis = ScaledBasis::of(poly);
  Eigen::MatrixXd D(n, 3);
  for (int i = 0; i < n; ++i)
    D.row(i) = basis.eval(poly.vertex(static_cast<std::size_t>(i))).transpose();
  return D;
}

// Consistency term plus dofi-dofi stabilization. On triangles the projector
// is bijective, so the stabilization is dropped as exactly zero and the
// result equals the classical P1 stiffness.
inline Eigen::MatrixXd local_stiffness(const ConvexPolygonView& poly, double diffusion,
                                       const Matrix3X& P) {
  const int n = static_cast<int>(poly.size());
  const double h = poly.shape.longest_edge;
  const double scale = diffusion * poly.shape.area / (h * h);
  Eigen::MatrixXd K = scale * (P.row(1).transpose() * P.row(1) + P.row(2).transpose() * P.row(2));
  if (n > 3) {
    const Eigen::MatrixXd R = Eigen::MatrixXd::Identity(n, n) - monomial_dof_matrix(poly) * P;
    K.noalias() += diffusion * R.transpose() * R;
  }
  return K;
}

inline Eigen::MatrixXd local_stiffness(const ConvexPolygonView& poly, double diffusion) {
  return local_stiffness(poly, diffusion, projector_matrix(poly));
}

// Spectral condition number of the projector matrix.
inline double projector_condition(const Matrix3X& P) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(P);
  const auto& s = svd.singularValues();
  return s(0) / s(s.size() - 1);
}

// P1 polynomial on one cell in its scaled basis.
struct CellPolynomial {
  Eigen::Vector3d coeffs = Eigen::Vector3d::Zero();
  ScaledBasis basis;

  double eval(Point2 p) const { return coeffs.dot(basis.eval(p)); }
  Point2 gradient() const { return {coeffs(1) / basis.h, coeffs(2) / basis.h}; }
};

// Problem data for -div(K grad u) = f with Dirichlet boundary everywhere.
// A null forcing means f == 0. The exact gradient (when known) feeds the
// energy-error computation; singular_point marks where it blows up so the
// error quadrature can grade toward it.
struct PoissonProblem {
  double diffusion = 1.0;
  std::function<double(Point2)> forcing;
  std::function<double(Point2)> dirichlet;
  std::function<Point2(Point2)> exact_gradient;
  std::optional<Point2> singular_point;
};

// L2 projection of the forcing onto P1(E): the moments int f m_a by degree-2
// fan quadrature and the coefficients via the exact monomial mass matrix.
// This single code path feeds both the load vector and the estimator.
struct LoadProjection {
  Eigen::Vector3d moments = Eigen::Vector3d::Zero();
  Eigen::Vector3d coeffs = Eigen::Vector3d::Zero();
  double norm_sq = 0.0;  // ||f_delta||^2 over the cell
};

inline Eigen::Matrix3d monomial_mass_matrix(const ConvexPolygonView& poly,
                                            const ScaledBasis& basis) {
  Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      const double v = integrate_polygon(poly, kTriangleDeg2, [&](Point2 p) {
        const Eigen::Vector3d m = basis.eval(p);
        return m(a) * m(b);
      });
      H(a, b) = H(b, a) = v;
    }
  return H;
}

inline LoadProjection project_load(const ConvexPolygonView& poly, const ScaledBasis& basis,
                                   const std::function<double(Point2)>& forcing) {
  LoadProjection out;
  if (!forcing) return out;
  for (int a = 0; a < 3; ++a)
    out.moments(a) = integrate_polygon(poly, kTriangleDeg2, [&](Point2 p) {
      return forcing(p) * basis.eval(p)(a);
    });
  const Eigen::Matrix3d H = monomial_mass_matrix(poly, basis);
  out.coeffs = H.ldlt().solve(out.moments);
  out.norm_sq = out.coeffs.dot(H * out.coeffs);
  return out;
}

// Assembled global system with one dof per mesh point and symmetric
// Dirichlet elimination deferred to the solve.
struct LinearSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  std::vector<char> constrained;  // per dof
  Eigen::VectorXd boundary_values;
};

inline std::vector<char> boundary_point_flags(const PolyMesh& mesh) {
  std::vector<char> on_boundary(mesh.num_points(), 0);
  for (std::size_t e = 0; e < mesh.num_edge_slots(); ++e) {
    const Edge& ed = mesh.edge(static_cast<Index>(e));
    if (ed.freed() || !ed.boundary()) continue;
    on_boundary[static_cast<std::size_t>(ed.a)] = 1;
    on_boundary[static_cast<std::size_t>(ed.b)] = 1;
  }
  return on_boundary;
}

inline LinearSystem assemble(const PolyMesh& mesh, const PoissonProblem& problem) {
  const std::size_t ndof = mesh.num_points();
  LinearSystem sys;
  sys.rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ndof));
  sys.boundary_values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ndof));
  sys.constrained = boundary_point_flags(mesh);

  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<Point2> pts;
  for (std::size_t ci = 0; ci < mesh.num_cell_slots(); ++ci) {
    const Index c = static_cast<Index>(ci);
    if (!mesh.cell(c).alive()) continue;
    mesh.gather_cell_points(c, pts);
    const ConvexPolygonView view(pts);
    const Matrix3X P = projector_matrix(view);
    const Eigen::MatrixXd K = local_stiffness(view, problem.diffusion, P);
    const Cell& cc = mesh.cell(c);
    const int n = cc.size();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        triplets.emplace_back(cc.vert(i), cc.vert(j), K(i, j));
    if (problem.forcing) {
      const LoadProjection load = project_load(view, ScaledBasis::of(view), problem.forcing);
      const Eigen::VectorXd fe = P.transpose() * load.moments;
      for (int i = 0; i < n; ++i) sys.rhs(cc.vert(i)) += fe(i);
    }
  }
  sys.matrix.resize(static_cast<Eigen::Index>(ndof), static_cast<Eigen::Index>(ndof));
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());

  if (!problem.dirichlet) throw SingularSystem("Dirichlet data is required");
  bool any_constraint = false;
  for (std::size_t i = 0; i < ndof; ++i) {
    if (!sys.constrained[i]) continue;
    any_constraint = true;
    sys.boundary_values(static_cast<Eigen::Index>(i)) =
        problem.dirichlet(mesh.point(static_cast<Index>(i)));
  }
  if (!any_constraint) throw SingularSystem("no boundary points found");
  return sys;
}

// Direct sparse factorization of the reduced SPD system; iterative fallback.
// The contract is the residual bound, not the method.
inline Eigen::VectorXd solve_system(const LinearSystem& sys) {
  const Eigen::Index ndof = sys.rhs.size();
  std::vector<Eigen::Index> to_free(static_cast<std::size_t>(ndof), -1);
  Eigen::Index nfree = 0;
  for (Eigen::Index i = 0; i < ndof; ++i)
    if (!sys.constrained[static_cast<std::size_t>(i)]) to_free[static_cast<std::size_t>(i)] = nfree++;

  Eigen::VectorXd solution = sys.boundary_values;
  if (nfree == 0) return solution;

  // Reduced matrix and lifted right-hand side.
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd reduced_rhs(nfree);
  for (Eigen::Index i = 0; i < ndof; ++i) {
    const Eigen::Index fi = to_free[static_cast<std::size_t>(i)];
    if (fi < 0) continue;
    reduced_rhs(fi) = sys.rhs(i);
  }
  for (int k = 0; k < sys.matrix.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.matrix, k); it; ++it) {
      const Eigen::Index fi = to_free[static_cast<std::size_t>(it.row())];
      const Eigen::Index fj = to_free[static_cast<std::size_t>(it.col())];
      if (fi >= 0 && fj >= 0)
        triplets.emplace_back(fi, fj, it.value());
      else if (fi >= 0 && fj < 0)
        reduced_rhs(fi) -= it.value() * sys.boundary_values(it.col());
    }
  }
  Eigen::SparseMatrix<double> A(nfree, nfree);
  A.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::VectorXd u;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  bool solved = false;
  if (ldlt.info() == Eigen::Success) {
    u = ldlt.solve(reduced_rhs);
    solved = (ldlt.info() == Eigen::Success);
  }
  const double tol = 1e-10 * (1.0 + reduced_rhs.norm());
  if (!solved || (A * u - reduced_rhs).norm() > tol) {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg(A);
    cg.setTolerance(1e-14);
    cg.setMaxIterations(20 * nfree);
    u = cg.solve(reduced_rhs);
    if ((A * u - reduced_rhs).norm() > tol)
      throw SolverFailure("linear solve residual above tolerance after CG fallback");
  }
  for (Eigen::Index i = 0; i < ndof; ++i) {
    const Eigen::Index fi = to_free[static_cast<std::size_t>(i)];
    if (fi >= 0) solution(i) = u(fi);
  }
  return solution;
}

// Per-cell P1 projections of the dof vector, indexed by cell slot.
inline std::vector<CellPolynomial> project_solution(const PolyMesh& mesh,
                                                    const Eigen::VectorXd& dofs) {
  std::vector<CellPolynomial> out(mesh.num_cell_slots());
  std::vector<Point2> pts;
  for (std::size_t ci = 0; ci < mesh.num_cell_slots(); ++ci) {
    const Index c = static_cast<Index>(ci);
    if (!mesh.cell(c).alive()) continue;
    mesh.gather_cell_points(c, pts);
    const ConvexPolygonView view(pts);
    const Matrix3X P = projector_matrix(view);
    const Cell& cc = mesh.cell(c);
    Eigen::VectorXd local(cc.size());
    for (int i = 0; i < cc.size(); ++i) local(i) = dofs(cc.vert(i));
    out[ci].coeffs = P * local;
    out[ci].basis = ScaledBasis::of(view);
  }
  return out;
}

// Total dofi-dofi stabilization energy of a dof vector. Exactly zero on
// triangles by construction.
inline double stabilization_energy(const PolyMesh& mesh, const Eigen::VectorXd& dofs,
                                   double diffusion) {
  double acc = 0.0;
  std::vector<Point2> pts;
  for (std::size_t ci = 0; ci < mesh.num_cell_slots(); ++ci) {
    const Index c = static_cast<Index>(ci);
    if (!mesh.cell(c).alive()) continue;
    const Cell& cc = mesh.cell(c);
    if (cc.size() <= 3) continue;
    mesh.gather_cell_points(c, pts);
    const ConvexPolygonView view(pts);
    const Matrix3X P = projector_matrix(view);
    Eigen::VectorXd local(cc.size());
    for (int i = 0; i < cc.size(); ++i) local(i) = dofs(cc.vert(i));
    const Eigen::VectorXd r = local - monomial_dof_matrix(view) * (P * local);
    acc += diffusion * r.squaredNorm();
  }
  return acc;
}

// Max/mean projector condition number over alive cells.
struct ConditionStats {
  double max = 0.0;
  double mean = 0.0;
};

inline ConditionStats projector_condition_stats(const PolyMesh& mesh) {
  ConditionStats out;
  long long n = 0;
  std::vector<Point2> pts;
  for (std::size_t ci = 0; ci < mesh.num_cell_slots(); ++ci) {
    const Index c = static_cast<Index>(ci);
    if (!mesh.cell(c).alive()) continue;
    mesh.gather_cell_points(c, pts);
    const ConvexPolygonView view(pts);
    const double k = projector_condition(projector_matrix(view));
    out.max = std::max(out.max, k);
    out.mean += k;
    n += 1;
  }
  if (n > 0) out.mean /= static_cast<double>(n);
  return out;
}

}  // namespace polyref
