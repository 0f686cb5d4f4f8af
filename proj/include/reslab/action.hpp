#pragma once

#include <vector>

#include "reslab/field.hpp"
#include "reslab/profile.hpp"

namespace reslab {

// Uniformly discretized path on [0, T] with N+1 nodes in R^d.
struct PathGrid {
  double horizon = 0.0;
  int dim = 0;
  std::vector<double> nodes;  // (N+1) * dim, node k at nodes[k*dim ...]

  int segments() const { return static_cast<int>(nodes.size()) / dim - 1; }
  double spacing() const { return horizon / segments(); }
  double* node(int k) { return nodes.data() + static_cast<std::size_t>(k) * dim; }
  const double* node(int k) const { return nodes.data() + static_cast<std::size_t>(k) * dim; }

  static PathGrid line(const Vec& x, const Vec& y, double horizon, int n_segments);
};

// Frozen rate functional on the grid, composite midpoint rule:
//   1/2 sum_k dt | (p_{k+1}-p_k)/dt - b(s, (p_k+p_{k+1})/2) |^2.
double evaluate_action(const DriftField& field, double s, const PathGrid& path);

// Analytic gradient of the discrete action w.r.t. the interior nodes
// (endpoints pinned); uses the field Jacobian or central differences.
void action_gradient(const DriftField& field, double s, const PathGrid& path,
                     std::vector<double>& grad_interior);

struct ActionOptions {
  double grad_tol = 1e-6;      // max-norm convergence threshold
  int max_iterations = 10000;
  double t_max = 320.0;        // horizon ladder cap
  double t0 = 0.0;             // first rung; 0 = 5x relaxation time near the start point
  int min_nodes = 200;
  double nodes_per_time = 10.0;
  double ladder_rel_tol = 0.01;  // convergence flag if last rungs differ more
  int hyperplane_budget = 60;    // objective evaluations for separatrix descent
};

struct CostResult {
  double value = 0.0;
  bool converged = false;  // false = NOT_CONVERGED, best-so-far returned
  int iterations = 0;
  PathGrid path;
};

// V^s(x, y, T): minimum of the discrete action over interior nodes with
// endpoints pinned; multi-start (straight line and time-reversed downhill
// flow), best optimum kept.
CostResult minimize_cost(const DriftField& field, double s, const Vec& x, const Vec& y,
                         double horizon, int n_segments, const ActionOptions& opts = {});

struct QpResult {
  double value = 0.0;
  double best_horizon = 0.0;
  bool converged = false;  // ladder settled and optimizer converged
  PathGrid path;
};

// V^s(x, y) = inf_T V^s(x, y, T) over a doubling horizon ladder with
// warm starts; reports the ladder minimum and the achieving horizon.
QpResult quasi_potential(const DriftField& field, double s, const Vec& x, const Vec& y,
                         const ActionOptions& opts = {});

// inf over the separatrix of U(s, .) minus U(s, x_basin). Gradient fields only.
double well_depth(const DriftField& field, const GeometrySpec& geom, double s, Basin basin,
                  const ActionOptions& opts = {});

// e_i(s_j) = inf_{y in chi} V^{s_j}(x_i, y) on an M-point phase grid.
// Requires an explicit separatrix hyperplane; per-point failures are flagged.
EnergyProfile energy_profile(const DriftField& field, const GeometrySpec& geom, Basin basin,
                             int grid_size, const ActionOptions& opts = {});

// 5x the local relaxation time of the frozen flow near the point x
// (inverse of the slowest contracting rate of the linearization).
double default_ladder_start(const DriftField& field, double s, const Vec& x);

}  // namespace reslab
