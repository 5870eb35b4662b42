#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gccd/piecewise.hpp"

namespace gccd {

struct Vertex {
  int id = 0;
  std::string name;
  friend bool operator==(const Vertex&, const Vertex&) = default;
};

// A permitted change of state. With m_before/m_after the segment means:
//   up:   m_after >= m_before + gap
//   down: m_after <= m_before - gap
// Edge id 0 is reserved for "no change".
struct Edge {
  int id = 1;
  int source = 0;
  int target = 0;
  Direction direction = Direction::up;
  double gap = 0.0;
  double penalty = 0.0;

  // +1 for up, -1 for down; the constraint is sign * (m_before - m_after) + gap <= 0.
  double sign() const { return direction == Direction::up ? 1.0 : -1.0; }
  double constraint(double before, double after) const {
    return sign() * (before - after) + gap;
  }
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Plain data so that invalid graphs can be represented and diagnosed; use
// validate() or parse_graph() before handing one to the solver.
struct ConstraintGraph {
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  std::vector<int> start_states;
  std::vector<int> end_states;

  std::size_t num_vertices() const { return vertices.size(); }
  std::optional<int> find(std::string_view name) const;
  const Edge& edge(int id) const;
  const std::string& name(int vertex) const { return vertices.at(static_cast<std::size_t>(vertex)).name; }
  double max_gap() const;

  friend bool operator==(const ConstraintGraph&, const ConstraintGraph&) = default;
};

enum class Severity { error, warning };

struct Diagnostic {
  Severity severity;
  std::string message;
};

std::vector<Diagnostic> validate(const ConstraintGraph& g);
bool has_errors(const std::vector<Diagnostic>& diagnostics);
// Throws std::invalid_argument carrying the first error, if any.
void require_valid(const ConstraintGraph& g);

// Line format:
//   state <NAME>
//   edge <SRC> <DST> <up|down> gap=<x> penalty=<x>
//   start <NAME>...      (default: every state)
//   end <NAME>...        (default: every state)
// '#' starts a comment. Throws ParseError with the offending line.
ConstraintGraph parse_graph(std::string_view text);
ConstraintGraph load_graph(const std::string& path);
std::string serialize(const ConstraintGraph& g);

enum class Wave { P, Q, R, S, T };

// Gap for each template edge, keyed "SRC->DST" (e.g. "B1->P"); edges not in
// the table use `fallback`.
struct TemplateGaps {
  double fallback = 0.0;
  std::map<std::string, double> by_edge;

  double at(const std::string& source, const std::string& target) const;
};

// One heart cycle: B1 [P B2] [Q] R [S] [B3 T] and back to B1. Baselines are
// named B1..B3 in order of use, or just "B" when the cycle has one. Edges into
// P, R, T go up, edges into Q, S go down, and returns to a baseline go the
// opposite way of the wave they leave. Edges entering a wave carry `penalty`,
// returns to a baseline carry zero.
ConstraintGraph ecg_template(const std::vector<Wave>& waves, const TemplateGaps& gaps, double penalty);

// Parses a wave set such as "PQRST" or "R".
std::vector<Wave> parse_waves(std::string_view text);

}  // namespace gccd
