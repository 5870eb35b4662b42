#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gccd/graph.hpp"

namespace gccd {

// Samples [start, end], 1-based and inclusive, fitted by one mean in one state.
struct Segment {
  std::size_t start = 1;
  std::size_t end = 1;
  int state = 0;
  double mean = 0.0;
  friend bool operator==(const Segment&, const Segment&) = default;
};

// The change taken by `edge` between samples `position` and `position + 1`.
struct Change {
  std::size_t position = 0;
  int edge = 0;
  friend bool operator==(const Change&, const Change&) = default;
};

struct Segmentation {
  std::vector<Segment> segments;
  std::vector<Change> changes;
  double total_cost = 0.0;
};

// Tolerance on the change constraint when checking a segmentation.
constexpr double kConstraintTolerance = 1e-9;

struct CostCheck {
  double cost = 0.0;
  bool feasible = false;
};

// Recomputes the penalized square-loss objective of `seg` and checks it
// against the graph: edges join the right states, every gap constraint holds,
// and the first/last states are allowed start/end states. Throws
// std::invalid_argument when the segments do not tile [1, N].
CostCheck cost_of(const Segmentation& seg, std::span<const double> signal, const ConstraintGraph& g);

// Per-sample state ids.
std::vector<int> decode_states(const Segmentation& seg, std::size_t n);

// {"segments": [{"start","end","state","mean"}...],
//  "changes": [{"position","edge"}...], "total_cost"}
// States are written by name.
std::string segmentation_to_json(const Segmentation& seg, const ConstraintGraph& g);
Segmentation segmentation_from_json(std::string_view json, const ConstraintGraph& g);

}  // namespace gccd
