#pragma once

#include <span>

#include "gccd/graph.hpp"
#include "gccd/segmentation.hpp"

namespace gccd {

// Reference solver for tests. It restricts every segment mean to the grid
// step * Z and minimizes the same objective exactly over that grid, without
// touching the piecewise-function engine.
struct OracleConfig {
  double mean_grid_step = 0.01;
  std::size_t max_n = 12;
  std::size_t max_states = 3;
};

struct OracleResult {
  double cost = 0.0;
  // The continuous optimum lies in [cost - grid_bound, cost].
  double grid_bound = 0.0;
  Segmentation segmentation;
};

// Grid dynamic program over (sample, state, grid mean). Every gap must be a
// multiple of the grid step: flooring each optimal mean to the grid then keeps
// all constraints, which is what makes grid_bound valid:
//   N * step^2 + 2 * step * sqrt(N * cost).
// Throws std::invalid_argument when the caps are exceeded or a gap is off-grid,
// InfeasibleError when no grid segmentation exists.
OracleResult oracle_solve(std::span<const double> signal, const ConstraintGraph& g, const OracleConfig& cfg = {});

// Slower cross-check of oracle_solve: enumerates every (state, change)
// sequence explicitly and fits grid means per sequence. Intended for N <= 8.
OracleResult oracle_enumerate(std::span<const double> signal, const ConstraintGraph& g, const OracleConfig& cfg = {});

}  // namespace gccd
