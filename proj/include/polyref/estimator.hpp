#pragma once

// Residual a posteriori estimator for the projected k=1 solution, the exact
// energy error against a known gradient, the effectivity index, and the
// stabilization/estimator ratio.
//
// For k=1 with cellwise-constant diffusion the elementwise residual
// div(K grad u_pi) vanishes, so the volume term reduces to the projected
// load; the edge terms are co-normal jumps of the constant per-cell
// gradients, each interior edge contributing half to both neighbours.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "polyref/mesh.hpp"
#include "polyref/quadrature.hpp"
#include "polyref/vem.hpp"

namespace polyref {

struct BoundaryEdgeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unit normal of edge e pointing out of cell c (which must traverse e).
inline Point2 edge_outward_normal(const PolyMesh& mesh, Index e, Index c) {
  const Cell& cc = mesh.cell(c);
  const int k = cc.find_edge(e);
  if (k < 0) throw MeshError("edge does not belong to the cell");
  const Point2 a = mesh.point(cc.vert(k));
  const Point2 b = mesh.point(cc.vert((k + 1) % cc.size()));
  const Point2 d = b - a;
  const double len = norm(d);
  return {d.y / len, -d.x / len};
}

// Jump of the co-normal derivative across an interior edge, constant along
// the edge for k=1. The normal points from the lower to the higher cell id,
// so the sign is a fixed convention and the squared edge integral is
// h_e * jump^2.
inline double edge_jump(const PolyMesh& mesh, const std::vector<CellPolynomial>& projected,
                        double diffusion, Index e) {
  const Edge& ed = mesh.edge(e);
  if (ed.boundary() || !mesh.cell_alive(ed.cell[0]) || !mesh.cell_alive(ed.cell[1]))
    throw BoundaryEdgeError("jump requested on a boundary edge");
  const Index lo = std::min(ed.cell[0], ed.cell[1]);
  const Index hi = std::max(ed.cell[0], ed.cell[1]);
  const Point2 n = edge_outward_normal(mesh, e, lo);
  const Point2 glo = projected[static_cast<std::size_t>(lo)].gradient();
  const Point2 ghi = projected[static_cast<std::size_t>(hi)].gradient();
  return diffusion * dot(glo, n) - diffusion * dot(ghi, n);
}

struct ElementEstimate {
  Index cell = kNone;
  double residual_sq = 0.0;  // H_E^2/K * ||f_delta||^2
  double jump_sq = 0.0;      // half-share of the incident interior edge terms

  double total_sq() const { return residual_sq + jump_sq; }
};

inline ElementEstimate element_estimate(const PolyMesh& mesh,
                                        const std::vector<CellPolynomial>& projected,
                                        double load_norm_sq, double diffusion, Index c) {
  ElementEstimate out;
  out.cell = c;
  const double h_max = mesh.cell_longest_edge(c);
  out.residual_sq = h_max * h_max / diffusion * load_norm_sq;
  const Cell& cc = mesh.cell(c);
  for (int k = 0; k < cc.size(); ++k) {
    const Index e = cc.edge(k);
    if (mesh.edge(e).boundary()) continue;
    const double he = mesh.edge_length(e);
    const double jump = edge_jump(mesh, projected, diffusion, e);
    out.jump_sq += 0.5 * (he / diffusion) * he * jump * jump;
  }
  return out;
}

struct EstimateReport {
  std::vector<ElementEstimate> elements;  // alive cells, ascending id
  double eta = 0.0;                       // global residual estimator
  std::optional<double> err;              // exact energy error, when computable
  std::optional<double> effectivity;      // err / eta, when both exist
  double energy_norm = 0.0;               // ||sqrt(K) grad u_pi||
  double stab_energy = 0.0;
  double stab_ratio = 0.0;                // stab_energy / eta^2
};

// Exact energy error against the problem gradient, by degree-5 fan
// quadrature; fan triangles touching the singular point grade toward it.
inline double energy_error_sq(const PolyMesh& mesh, const PoissonProblem& problem,
                              const std::vector<CellPolynomial>& projected) {
  constexpr int kGradeLevels = 4;
  double acc = 0.0;
  std::vector<Point2> pts;
  for (std::size_t ci = 0; ci < mesh.num_cell_slots(); ++ci) {
    const Index c = static_cast<Index>(ci);
    if (!mesh.cell(c).alive()) continue;
    mesh.gather_cell_points(c, pts);
    const ConvexPolygonView view(pts);
    const Point2 gh = projected[ci].gradient();
    auto integrand = [&](Point2 p) {
      const Point2 g = problem.exact_gradient(p);
      const Point2 d = g - gh;
      return problem.diffusion * dot(d, d);
    };
    const Point2 centroid = view.shape.centroid;
    const std::size_t n = view.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 a = view.vertex(i);
      const Point2 b = view.vertex((i + 1) % n);
      if (problem.singular_point) {
        const Point2 s = *problem.singular_point;
        if (dist(a, s) < 1e-12) {
          acc += integrate_triangle_graded(a, b, centroid, kGradeLevels, integrand);
          continue;
        }
        if (dist(b, s) < 1e-12) {
          acc += integrate_triangle_graded(b, centroid, a, kGradeLevels, integrand);
          continue;
        }
      }
      acc += integrate_triangle(centroid, a, b, kTriangleDeg5, integrand);
    }
  }
  return acc;
}

inline EstimateReport global_estimate(const PolyMesh& mesh, const PoissonProblem& problem,
                                      const Eigen::VectorXd& dofs) {
  EstimateReport report;
  const std::vector<CellPolynomial> projected = project_solution(mesh, dofs);

  double eta_sq = 0.0;
  double energy_sq = 0.0;
  std::vector<Point2> pts;
  for (std::size_t ci = 0; ci < mesh.num_cell_slots(); ++ci) {
    const Index c = static_cast<Index>(ci);
    if (!mesh.cell(c).alive()) continue;
    double load_norm_sq = 0.0;
    double area;
    if (problem.forcing) {
      mesh.gather_cell_points(c, pts);
      const ConvexPolygonView view(pts);
      load_norm_sq = project_load(view, ScaledBasis::of(view), problem.forcing).norm_sq;
      area = view.shape.area;
    } else {
      area = mesh.cell_area(c);
    }
    report.elements.push_back(element_estimate(mesh, projected, load_norm_sq,
                                               problem.diffusion, c));
    eta_sq += report.elements.back().total_sq();
    const Point2 g = projected[ci].gradient();
    energy_sq += problem.diffusion * area * dot(g, g);
  }
  report.eta = std::sqrt(eta_sq);
  report.energy_norm = std::sqrt(energy_sq);
  report.stab_energy = stabilization_energy(mesh, dofs, problem.diffusion);
  report.stab_ratio = eta_sq > 0.0 ? report.stab_energy / eta_sq : 0.0;
  if (problem.exact_gradient) {
    report.err = std::sqrt(energy_error_sq(mesh, problem, projected));
    if (report.eta > 0.0) report.effectivity = *report.err / report.eta;
  }
  return report;
}

}  // namespace polyref
