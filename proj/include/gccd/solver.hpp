#pragma once

#include <span>

#include "gccd/graph.hpp"
#include "gccd/segmentation.hpp"

namespace gccd {

struct SolveStats {
  std::size_t max_pieces = 0;     // largest per-state cost function seen
  double mean_pieces = 0.0;       // averaged over every (sample, state)
  std::size_t trace_records = 0;  // backpointer runs kept for decoding
};

// Mean domain searched by the solver. Optimal means can leave the data range
// by at most one maximal gap per change, so the range is widened accordingly.
struct MeanDomain {
  double lo;
  double hi;
};
MeanDomain mean_domain(std::span<const double> signal, const ConstraintGraph& g);

// Globally optimal graph-constrained segmentation under square loss:
//
//   minimize  sum_i (y_i - m_i)^2 + sum over changes of penalty(edge)
//
// where consecutive samples either share mean and state, or move along an
// edge whose gap constraint holds between the two means. The first state must
// be a start state and the last an end state.
//
// Runs a forward dynamic program over one piecewise-quadratic cost function
// of the current mean per state, then decodes backwards. Ties prefer no
// change, then the lowest edge id, then the lowest state id.
//
// Throws std::invalid_argument on an empty signal or invalid graph, and
// InfeasibleError when no segmentation satisfies the graph.
Segmentation solve(std::span<const double> signal, const ConstraintGraph& g, SolveStats* stats = nullptr);

}  // namespace gccd
