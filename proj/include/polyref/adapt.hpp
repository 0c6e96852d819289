#pragma once

// The solve -> estimate -> mark -> refine loop with bulk marking and the
// uniform-refinement driver. Each iteration appends a full record of the
// estimator, quality and conditioning state, which downstream reporting
// turns into CSV rows.

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "polyref/estimator.hpp"
#include "polyref/mesh.hpp"
#include "polyref/quality.hpp"
#include "polyref/refine.hpp"
#include "polyref/vem.hpp"

namespace polyref {

struct AllZeroEstimates : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AdaptConfig {
  double theta = 0.5;   // bulk-marking fraction
  double tol = 1e-4;    // stop once eta^2 / energy_norm^2 <= tol
  int max_iter = 100;
  long long max_dofs = 0;  // 0 = unbounded; stop once the solve had this many
  RefineConfig refine;
  bool conforming_triangles = false;  // longest-edge + conformity closure (FEM P1 mode)
};

struct IterationRecord {
  int iter = 0;
  long long n_dofs = 0;
  long long n_cells = 0;
  long long marked = 0;
  std::optional<EstimateReport> estimate;  // absent in uniform refinement
  MeshStats stats;
  double kappa_max = 0.0;
  double kappa_mean = 0.0;
};

// Bulk marking: the shortest prefix of cells, by descending squared
// indicator, whose sum reaches theta * total. Boundary ties resolve to the
// lower index. Returns positions into the input array, ascending.
inline std::vector<int> dorfler_mark(std::span<const double> eta_sq, double theta) {
  const double total = std::accumulate(eta_sq.begin(), eta_sq.end(), 0.0);
  if (!(total > 0.0)) throw AllZeroEstimates("all squared indicators are zero");
  std::vector<int> order(eta_sq.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return eta_sq[static_cast<std::size_t>(a)] != eta_sq[static_cast<std::size_t>(b)]
               ? eta_sq[static_cast<std::size_t>(a)] > eta_sq[static_cast<std::size_t>(b)]
               : a < b;
  });
  std::vector<int> marked;
  double acc = 0.0;
  for (int idx : order) {
    marked.push_back(idx);
    acc += eta_sq[static_cast<std::size_t>(idx)];
    if (acc >= theta * total) break;
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

inline std::vector<IterationRecord> adaptive_loop(PolyMesh& mesh, const PoissonProblem& problem,
                                                  const AdaptConfig& config) {
  std::vector<IterationRecord> records;
  Refiner refiner(mesh, config.refine);
  for (int iter = 0; iter < config.max_iter; ++iter) {
    const Eigen::VectorXd dofs = solve_system(assemble(mesh, problem));
    IterationRecord rec;
    rec.iter = iter;
    rec.n_dofs = static_cast<long long>(mesh.num_points());
    rec.n_cells = mesh.num_alive_cells();
    rec.estimate = global_estimate(mesh, problem, dofs);
    rec.stats = mesh_stats(mesh);
    const ConditionStats kappa = projector_condition_stats(mesh);
    rec.kappa_max = kappa.max;
    rec.kappa_mean = kappa.mean;

    const EstimateReport& est = *rec.estimate;
    const bool converged =
        est.eta * est.eta <= config.tol * est.energy_norm * est.energy_norm;
    const bool dof_budget = config.max_dofs > 0 && rec.n_dofs >= config.max_dofs;
    if (converged || dof_budget || iter + 1 == config.max_iter) {
      records.push_back(std::move(rec));
      break;
    }

    std::vector<double> eta_sq(est.elements.size());
    for (std::size_t k = 0; k < est.elements.size(); ++k)
      eta_sq[k] = est.elements[k].total_sq();
    const std::vector<int> marked_pos = dorfler_mark(eta_sq, config.theta);
    std::vector<Index> marked;
    marked.reserve(marked_pos.size());
    for (int pos : marked_pos) marked.push_back(est.elements[static_cast<std::size_t>(pos)].cell);
    rec.marked = static_cast<long long>(marked.size());
    records.push_back(std::move(rec));

    if (config.conforming_triangles)
      refiner.refine_marked_conforming(marked);
    else
      refiner.refine_marked(marked);
  }
  return records;
}

// Uniform refinement: every alive cell is marked each pass; no PDE is
// solved. Runs the mesh in its slot-recycling mode -- passes at twenty-plus
// doublings would not fit in memory with tombstones retained.
inline std::vector<IterationRecord> uniform_loop(PolyMesh& mesh, const RefineConfig& config,
                                                 int n_iters) {
  mesh.set_keep_history(false);
  mesh.set_track_ancestry(false);
  Refiner refiner(mesh, config);
  std::vector<IterationRecord> records;
  auto record = [&](int iter, long long marked) {
    IterationRecord rec;
    rec.iter = iter;
    rec.n_dofs = static_cast<long long>(mesh.num_points());
    rec.n_cells = mesh.num_alive_cells();
    rec.marked = marked;
    rec.stats = mesh_stats(mesh);
    records.push_back(std::move(rec));
  };
  std::vector<Index> marked;
  record(0, mesh.num_alive_cells());
  for (int iter = 1; iter <= n_iters; ++iter) {
    marked.clear();
    for (std::size_t c = 0; c < mesh.num_cell_slots(); ++c)
      if (mesh.cell_alive(static_cast<Index>(c))) marked.push_back(static_cast<Index>(c));
    refiner.refine_marked(marked);
    record(iter, iter < n_iters ? mesh.num_alive_cells() : 0);
  }
  return records;
}

}  // namespace polyref
